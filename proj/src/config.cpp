/**
 * Copyright 2026 The dfscil Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "dfscil/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "dfscil/errors.hpp"

namespace dfscil {

using nlohmann::json;

namespace {

template <typename T>
T as(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type: " + v.dump());
  }
}

std::size_t as_count(const json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError("config key '" + key + "' must be a non-negative integer, got " + v.dump());
  }
  return v.get<std::size_t>();
}

int as_int(const json& v, const std::string& key) {
  if (!v.is_number_integer()) {
    throw ConfigError("config key '" + key + "' must be an integer, got " + v.dump());
  }
  return v.get<int>();
}

}  // namespace

PseudoConfig ExperimentConfig::effective_pseudo() const {
  PseudoConfig p = pseudo;
  p.enabled = enable_pc;
  return p;
}

TrainerConfig ExperimentConfig::effective_trainer() const {
  TrainerConfig t = trainer;
  if (!enable_pc) t.eta = 0.0;
  if (!enable_da) t.novel_epochs = 0;
  return t;
}

std::string ExperimentConfig::variant() const {
  if (enable_pc && enable_da) return "D-FSCIL";
  if (enable_pc) return "DDL+PC";
  if (enable_da) return "DDL+DA";
  return "DDL";
}

void ExperimentConfig::validate() const {
  model.validate();
  pseudo.validate();
  trainer.validate();
}

json ExperimentConfig::to_json() const {
  json j;
  j["seed"] = trainer.seed;
  j["data.manifest"] = manifest.string();
  j["output.dir"] = output_dir.string();
  j["model.hidden"] = model.hidden;
  j["model.feature_dim"] = model.feature_dim;
  j["dictionary.atoms"] = model.atoms;
  j["dictionary.lambda"] = model.lambda;
  j["classifier.tau"] = model.tau;
  j["pseudo.classes"] = pseudo.classes;
  j["pseudo.per_class"] = pseudo.per_class;
  j["pseudo.gamma_lo"] = pseudo.gamma_lo;
  j["pseudo.gamma_hi"] = pseudo.gamma_hi;
  j["trainer.eta"] = trainer.eta;
  j["trainer.alpha"] = trainer.alpha;
  j["trainer.base_epochs"] = trainer.base_epochs;
  j["trainer.novel_epochs"] = trainer.novel_epochs;
  j["trainer.batch_size"] = trainer.batch_size;
  j["trainer.base_lr"] = trainer.base_lr.initial;
  j["trainer.base_schedule"] = to_string(trainer.base_lr.kind);
  j["trainer.step_factor"] = trainer.base_lr.step_factor;
  j["trainer.step_every"] = trainer.base_lr.step_every;
  j["trainer.novel_lr"] = trainer.novel_lr.initial;
  j["trainer.novel_schedule"] = to_string(trainer.novel_lr.kind);
  j["trainer.momentum"] = trainer.momentum;
  j["ablation.enable_pc"] = enable_pc;
  j["ablation.enable_da"] = enable_da;
  return j;
}

void ExperimentConfig::merge(const json& flat) {
  if (!flat.is_object()) throw ConfigError("config must be a flat JSON object");
  for (const auto& [key, v] : flat.items()) {
    if (key == "seed") {
      if (!v.is_number_integer()) throw ConfigError("config key 'seed' must be an integer");
      trainer.seed = v.get<std::uint64_t>();
    } else if (key == "data.manifest") {
      manifest = as<std::string>(v, key);
    } else if (key == "output.dir") {
      output_dir = as<std::string>(v, key);
    } else if (key == "model.hidden") {
      if (!v.is_array()) throw ConfigError("config key 'model.hidden' must be an array of widths");
      model.hidden.clear();
      for (const json& w : v) model.hidden.push_back(as_count(w, key));
    } else if (key == "model.feature_dim") {
      model.feature_dim = as_count(v, key);
    } else if (key == "dictionary.atoms") {
      model.atoms = as_count(v, key);
    } else if (key == "dictionary.lambda") {
      model.lambda = as<double>(v, key);
    } else if (key == "classifier.tau") {
      model.tau = as<double>(v, key);
    } else if (key == "pseudo.classes") {
      pseudo.classes = as_count(v, key);
    } else if (key == "pseudo.per_class") {
      pseudo.per_class = as_count(v, key);
    } else if (key == "pseudo.gamma_lo") {
      pseudo.gamma_lo = as<double>(v, key);
    } else if (key == "pseudo.gamma_hi") {
      pseudo.gamma_hi = as<double>(v, key);
    } else if (key == "trainer.eta") {
      trainer.eta = as<double>(v, key);
    } else if (key == "trainer.alpha") {
      trainer.alpha = as<double>(v, key);
    } else if (key == "trainer.base_epochs") {
      trainer.base_epochs = as_int(v, key);
    } else if (key == "trainer.novel_epochs") {
      trainer.novel_epochs = as_int(v, key);
    } else if (key == "trainer.batch_size") {
      trainer.batch_size = as_count(v, key);
    } else if (key == "trainer.base_lr") {
      trainer.base_lr.initial = as<double>(v, key);
    } else if (key == "trainer.base_schedule") {
      trainer.base_lr.kind = parse_schedule_kind(as<std::string>(v, key));
    } else if (key == "trainer.step_factor") {
      trainer.base_lr.step_factor = as<double>(v, key);
    } else if (key == "trainer.step_every") {
      trainer.base_lr.step_every = as_int(v, key);
    } else if (key == "trainer.novel_lr") {
      trainer.novel_lr.initial = as<double>(v, key);
    } else if (key == "trainer.novel_schedule") {
      trainer.novel_lr.kind = parse_schedule_kind(as<std::string>(v, key));
    } else if (key == "trainer.momentum") {
      trainer.momentum = as<double>(v, key);
    } else if (key == "ablation.enable_pc") {
      enable_pc = as<bool>(v, key);
    } else if (key == "ablation.enable_da") {
      enable_da = as<bool>(v, key);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  json v;
  try {
    v = json::parse(value);
  } catch (const json::parse_error&) {
    v = value;
  }
  merge(json{{key, v}});
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  json doc;
  try {
    doc = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": offset " + std::to_string(e.byte) + ": " + e.what());
  }
  ExperimentConfig cfg;
  cfg.merge(doc);
  const auto base = path.parent_path();
  if (!cfg.manifest.empty() && cfg.manifest.is_relative()) cfg.manifest = base / cfg.manifest;
  if (cfg.output_dir.is_relative()) {
    const char* root = std::getenv(kOutputRootEnv);
    cfg.output_dir = (root && *root ? std::filesystem::path(root) : base) / cfg.output_dir;
  }
  cfg.validate();
  return cfg;
}

std::string sweep_axis_key(const std::string& axis) {
  if (axis == "m") return "dictionary.atoms";
  if (axis == "lambda") return "dictionary.lambda";
  if (axis == "tau") return "classifier.tau";
  if (axis == "eta") return "trainer.eta";
  if (axis == "alpha") return "trainer.alpha";
  if (axis == "pseudo-classes") return "pseudo.classes";
  throw ConfigError("unknown sweep axis '" + axis +
                    "' (expected m, lambda, tau, eta, alpha or pseudo-classes)");
}

}  // namespace dfscil

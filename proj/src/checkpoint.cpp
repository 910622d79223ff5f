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

#include "dfscil/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "dfscil/errors.hpp"

namespace dfscil {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m) {
  std::vector<double> data(m.data(), m.data() + m.size());
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows * cols) != data.size()) {
    throw ParseError("checkpoint: matrix payload does not match its shape");
  }
  Matrix m(rows, cols);
  std::copy(data.begin(), data.end(), m.data());
  return m;
}

json prototypes_to_json(const PrototypeSet& p) {
  return {{"session", p.session()}, {"labels", p.labels()}, {"frozen", p.frozen()},
          {"vectors", matrix_to_json(p.vectors())}};
}

PrototypeSet prototypes_from_json(const json& j) {
  PrototypeSet p(j.at("session").get<int>(), j.at("labels").get<std::vector<Label>>(),
                 matrix_from_json(j.at("vectors")));
  if (j.at("frozen").get<bool>()) p.freeze();
  return p;
}

json dictionary_to_json(const Dictionary& d) {
  return {{"lambda", d.lambda()}, {"atoms", matrix_to_json(d.atoms())}};
}

Dictionary dictionary_from_json(const json& j) {
  return Dictionary(matrix_from_json(j.at("atoms")), j.at("lambda").get<double>());
}

}  // namespace

json checkpoint_to_json(const ModelState& state, const json& config) {
  json doc;
  doc["format"] = kCheckpointFormat;
  doc["version"] = kCheckpointVersion;
  doc["seed"] = state.seed;
  doc["cursor"] = state.cursor;
  doc["tau"] = state.classifier.tau;

  json layers = json::array();
  for (std::size_t i = 0; i < state.extractor.layer_count(); ++i) {
    layers.push_back({{"weight", matrix_to_json(state.extractor.weight(i))},
                      {"bias", matrix_to_json(state.extractor.bias(i))}});
  }
  doc["extractor"] = {{"widths", state.extractor.widths()},
                      {"frozen", state.extractor.frozen()},
                      {"layers", std::move(layers)}};
  doc["dictionary"] = dictionary_to_json(state.dictionary);
  doc["anchor"] = state.anchor ? dictionary_to_json(*state.anchor) : json(nullptr);

  json sets = json::array();
  for (const PrototypeSet& p : state.prototypes) sets.push_back(prototypes_to_json(p));
  doc["prototypes"] = std::move(sets);
  doc["pseudo_prototypes"] =
      state.pseudo_prototypes ? prototypes_to_json(*state.pseudo_prototypes) : json(nullptr);

  if (state.plan) {
    json pairs = json::array();
    for (const ClassPair& p : state.plan->pairs) pairs.push_back({p.first, p.second, p.pseudo});
    doc["plan"] = {{"pairs", std::move(pairs)},
                   {"gamma_lo", state.plan->gamma_lo},
                   {"gamma_hi", state.plan->gamma_hi},
                   {"per_class", state.plan->per_class}};
  } else {
    doc["plan"] = nullptr;
  }
  doc["config"] = config;
  return doc;
}

Checkpoint checkpoint_from_json(const json& doc) {
  try {
    if (doc.at("format").get<std::string>() != kCheckpointFormat) {
      throw ParseError("not a dfscil checkpoint");
    }
    if (doc.at("version").get<int>() != kCheckpointVersion) {
      throw ParseError("unsupported checkpoint version " + doc.at("version").dump());
    }
    Checkpoint ck;
    ModelState& s = ck.state;
    s.seed = doc.at("seed").get<std::uint64_t>();
    s.cursor = doc.at("cursor").get<std::size_t>();
    s.classifier.tau = doc.at("tau").get<double>();

    const json& ex = doc.at("extractor");
    std::vector<Matrix> weights, biases;
    for (const json& layer : ex.at("layers")) {
      weights.push_back(matrix_from_json(layer.at("weight")));
      biases.push_back(matrix_from_json(layer.at("bias")));
    }
    s.extractor = FeatureExtractor(std::move(weights), std::move(biases));
    if (s.extractor.widths() != ex.at("widths").get<std::vector<std::size_t>>()) {
      throw ParseError("checkpoint: extractor widths disagree with layer shapes");
    }
    if (ex.at("frozen").get<bool>()) s.extractor.freeze();

    s.dictionary = dictionary_from_json(doc.at("dictionary"));
    if (!doc.at("anchor").is_null()) s.anchor = dictionary_from_json(doc.at("anchor"));
    for (const json& p : doc.at("prototypes")) s.prototypes.push_back(prototypes_from_json(p));
    if (!doc.at("pseudo_prototypes").is_null()) {
      s.pseudo_prototypes = prototypes_from_json(doc.at("pseudo_prototypes"));
    }
    if (!doc.at("plan").is_null()) {
      const json& pj = doc.at("plan");
      PseudoClassPlan plan;
      for (const json& p : pj.at("pairs")) {
        plan.pairs.push_back({p.at(0).get<Label>(), p.at(1).get<Label>(), p.at(2).get<Label>()});
      }
      plan.gamma_lo = pj.at("gamma_lo").get<double>();
      plan.gamma_hi = pj.at("gamma_hi").get<double>();
      plan.per_class = pj.at("per_class").get<std::size_t>();
      plan.validate();
      s.plan = std::move(plan);
    }
    ck.config = doc.at("config");
    return ck;
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const ModelState& state, const json& config,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << checkpoint_to_json(state, config).dump() << "\n";
  if (!out) throw IoError("write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  json doc;
  try {
    doc = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": offset " + std::to_string(e.byte) + ": " + e.what());
  }
  return checkpoint_from_json(doc);
}

}  // namespace dfscil

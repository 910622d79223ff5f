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

#ifndef DFSCIL_CONFIG_HPP
#define DFSCIL_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "dfscil/trainer.hpp"

namespace dfscil {

/// Every knob of one experiment. On disk it is a flat JSON object with
/// dotted keys ("trainer.eta", "dictionary.atoms", ...); omitted keys keep
/// their defaults and unknown keys are rejected.
struct ExperimentConfig {
  ModelConfig model;
  PseudoConfig pseudo;
  TrainerConfig trainer;
  bool enable_pc = true;  // pseudo-class augmented base training
  bool enable_da = true;  // dictionary adaptation in novel sessions
  std::filesystem::path manifest;
  std::filesystem::path output_dir = "out";

  /// Applies the ablation switches: PC off removes the pseudo classes and
  /// zeroes eta; DA off sets novel epochs to 0.
  ModelConfig effective_model() const { return model; }
  PseudoConfig effective_pseudo() const;
  TrainerConfig effective_trainer() const;

  /// "D-FSCIL", "DDL", "DDL+PC" or "DDL+DA".
  std::string variant() const;

  /// Throws ConfigError for any value outside its domain.
  void validate() const;

  nlohmann::json to_json() const;
  /// Overlays the dotted keys of `flat` onto this config.
  void merge(const nlohmann::json& flat);
  /// Sets one dotted key from its textual value (used by sweeps).
  void set(const std::string& key, const std::string& value);
};

/// When set, relative output directories resolve against this root instead
/// of the config file's directory.
inline constexpr const char* kOutputRootEnv = "DFSCIL_OUTPUT_ROOT";

/// Defaults overlaid with the file's keys. Relative paths resolve against
/// the config file's directory.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Dotted key driven by a sweep axis name (m, lambda, tau, eta, alpha,
/// pseudo-classes). Throws ConfigError for anything else.
std::string sweep_axis_key(const std::string& axis);

}  // namespace dfscil

#endif  // DFSCIL_CONFIG_HPP

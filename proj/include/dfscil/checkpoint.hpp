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

#ifndef DFSCIL_CHECKPOINT_HPP
#define DFSCIL_CHECKPOINT_HPP

#include <filesystem>

#include <nlohmann/json.hpp>

#include "dfscil/trainer.hpp"

namespace dfscil {

inline constexpr const char* kCheckpointFormat = "dfscil-checkpoint";
inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  ModelState state;
  nlohmann::json config;  // the effective experiment config, stored verbatim
};

/// JSON container: format tag and version, extractor, dictionary, anchor,
/// every prototype set, the pseudo-class plan, config and seed. Doubles are
/// written in shortest round-trip form, so a load reproduces every value.
nlohmann::json checkpoint_to_json(const ModelState& state, const nlohmann::json& config);
Checkpoint checkpoint_from_json(const nlohmann::json& doc);

void save_checkpoint(const ModelState& state, const nlohmann::json& config,
                     const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace dfscil

#endif  // DFSCIL_CHECKPOINT_HPP

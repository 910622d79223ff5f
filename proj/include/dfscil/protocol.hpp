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

#ifndef DFSCIL_PROTOCOL_HPP
#define DFSCIL_PROTOCOL_HPP

#include <functional>
#include <vector>

#include "dfscil/data.hpp"
#include "dfscil/evaluation.hpp"
#include "dfscil/trainer.hpp"

namespace dfscil {

struct ProtocolHooks {
  StepObserver on_step;
  /// Called after each session has been trained and evaluated.
  std::function<void(std::size_t session, const ModelState&, const SessionMetrics&)> on_session;
};

struct ProtocolResult {
  ModelState state;
  EvaluationReport report;
  std::vector<TrainLog> logs;   // one per session
  std::vector<double> drift;    // ||M - M0||_F after each session
};

/// Validates the stream, trains the base session, then adapts to each novel
/// session in order, scoring the cumulative test set after every session.
ProtocolResult run_protocol(const SessionStream& stream, const ModelConfig& model,
                            const PseudoConfig& pseudo, const TrainerConfig& trainer,
                            const ProtocolHooks& hooks = {});

/// Test rows of sessions 0..t.
SessionDataset cumulative_test(const SessionStream& stream, std::size_t through_session);

}  // namespace dfscil

#endif  // DFSCIL_PROTOCOL_HPP

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

#include "dfscil/protocol.hpp"

#include "dfscil/errors.hpp"

namespace dfscil {

SessionDataset cumulative_test(const SessionStream& stream, std::size_t through_session) {
  if (through_session >= stream.sessions.size()) {
    throw StateError("stream has no session " + std::to_string(through_session));
  }
  std::vector<const SessionDataset*> parts;
  for (std::size_t t = 0; t <= through_session; ++t) parts.push_back(&stream.sessions[t].test);
  return concat(parts);
}

ProtocolResult run_protocol(const SessionStream& stream, const ModelConfig& model,
                            const PseudoConfig& pseudo, const TrainerConfig& trainer,
                            const ProtocolHooks& hooks) {
  try {
    stream.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
  model.validate();
  trainer.validate();

  ProtocolResult result{initialize_for_stream(stream, model, pseudo, trainer), {}, {}, {}};
  ModelState& state = result.state;
  for (std::size_t t = 0; t < stream.sessions.size(); ++t) {
    const SessionDataset& train = stream.sessions[t].train;
    result.logs.push_back(t == 0 ? train_base(state, train, trainer, hooks.on_step)
                                 : adapt_novel(state, train, trainer, hooks.on_step));
    result.drift.push_back(state.drift_norm());
    SessionMetrics metrics = evaluate_session(state, cumulative_test(stream, t), t);
    if (hooks.on_session) hooks.on_session(t, state, metrics);
    result.report.sessions.push_back(std::move(metrics));
  }
  return result;
}

}  // namespace dfscil

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

#ifndef DFSCIL_TRAINER_HPP
#define DFSCIL_TRAINER_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "dfscil/backbone.hpp"
#include "dfscil/classifier.hpp"
#include "dfscil/data.hpp"
#include "dfscil/dictionary.hpp"
#include "dfscil/optimizer.hpp"
#include "dfscil/pseudoclass.hpp"

namespace dfscil {

/// Architecture and representation hyper-parameters.
struct ModelConfig {
  std::vector<std::size_t> hidden{128};
  std::size_t feature_dim = 64;  // d
  std::size_t atoms = 32;        // m
  double lambda = 0.1;
  double tau = 0.1;

  void validate() const;
};

struct PseudoConfig {
  bool enabled = true;
  std::size_t classes = 0;    // 0: total number of novel classes in the stream
  std::size_t per_class = 0;  // 0: max(1, batch_size / classes)
  double gamma_lo = 0.4;
  double gamma_hi = 0.6;

  void validate() const;
};

struct TrainerConfig {
  double eta = 1e-3;
  double alpha = 10.0;
  int base_epochs = 200;
  int novel_epochs = 10;
  std::size_t batch_size = 64;
  LrSchedule base_lr{ScheduleKind::cosine, 0.05};
  LrSchedule novel_lr{ScheduleKind::constant, 5e-3};
  double momentum = 0.9;
  std::uint64_t seed = 7;

  void validate() const;
};

/// Everything learned by a run plus where it is in the session sequence.
struct ModelState {
  FeatureExtractor extractor;
  Dictionary dictionary;
  std::optional<Dictionary> anchor;          // M0, fixed once the base session ends
  std::vector<PrototypeSet> prototypes;      // real classes; index == session id
  std::optional<PrototypeSet> pseudo_prototypes;
  std::optional<PseudoClassPlan> plan;
  ClassifierConfig classifier;
  std::size_t cursor = 0;                    // next session to train
  std::uint64_t seed = 0;

  /// Random extractor, dictionary and base prototypes; pseudo prototypes
  /// only when a plan is given.
  static ModelState initialize(const ModelConfig& cfg, std::size_t input_dim,
                               std::span<const Label> base_classes,
                               std::optional<PseudoClassPlan> plan, std::uint64_t seed);

  /// Real prototype sets of sessions 0..t.
  std::vector<const PrototypeSet*> real_prototypes(std::size_t through_session) const;
  std::vector<const PrototypeSet*> real_prototypes() const;
  std::vector<Label> seen_labels() const;

  /// phi(x) followed by the closed-form coefficient solve.
  Matrix coefficients(const Matrix& x) const;

  /// ||M - M0||_F. Throws StateError before the base session has finished.
  double drift_norm() const;
};

/// Builds the plan for a stream: C0~ pairs of base classes with pseudo labels
/// placed above every label that occurs anywhere in the stream.
PseudoClassPlan plan_for_stream(const SessionStream& stream, const PseudoConfig& cfg,
                                std::size_t batch_size, std::uint64_t seed);

ModelState initialize_for_stream(const SessionStream& stream, const ModelConfig& model,
                                 const PseudoConfig& pseudo, const TrainerConfig& trainer);

struct BaseObjective {
  double loss = 0.0;     // cls + eta * pseudo
  double cls = 0.0;
  double pseudo = 0.0;   // 0 when no synthetic rows
  Gradient extractor;    // [W0, b0, W1, b1, ...]
  Matrix atoms;
  Matrix base_prototypes;
  Matrix pseudo_prototypes;  // empty without pseudo machinery
};

/// Produces synthetic rows from the batch features. Its output is treated as
/// a constant: no gradient flows back through it.
using Synthesizer = std::function<SyntheticBatch(const Matrix& features)>;

/// Base-session loss on one batch and its gradient with respect to the
/// extractor, the atoms, and both prototype sets.
BaseObjective base_objective(const ModelState& state, const Matrix& x, std::span<const Label> y,
                             const Synthesizer& synthesize, double eta);

struct NovelObjective {
  double loss = 0.0;  // cls + alpha * drift
  double cls = 0.0;
  double drift = 0.0;
  Matrix atoms_cls;   // gradient of the classification term only
  Matrix atoms;       // full gradient, including 2 alpha (M - M0)
  Matrix prototypes;  // gradient for the current session's prototypes
};

/// Novel-session loss on frozen features. `current` holds the prototypes
/// being learned; `denominator` lists every real prototype set so far.
NovelObjective novel_objective(const Dictionary& dict, const Dictionary& anchor,
                               const Matrix& features, std::span<const Label> labels,
                               const PrototypeSet& current,
                               std::span<const PrototypeSet* const> denominator,
                               const ClassifierConfig& cls, double alpha);

struct StepEvent {
  std::size_t session;
  int epoch;
  std::size_t step;
  double loss;
  const ModelState& state;
};

using StepObserver = std::function<void(const StepEvent&)>;

struct TrainLog {
  std::vector<double> epoch_loss;  // mean batch loss per epoch
  std::size_t steps = 0;
};

/// Joint SGD on extractor, dictionary and prototypes for session 0. Freezes
/// the extractor and base prototypes and records the anchor dictionary.
TrainLog train_base(ModelState& state, const SessionDataset& data, const TrainerConfig& cfg,
                    const StepObserver& observer = {});

/// Extends the prototypes with per-class coefficient means, then optimises
/// the dictionary and the new prototypes. The drift term is applied as an
/// exact proximal step after each momentum step on the classification term.
TrainLog adapt_novel(ModelState& state, const SessionDataset& data, const TrainerConfig& cfg,
                     const StepObserver& observer = {});

}  // namespace dfscil

#endif  // DFSCIL_TRAINER_HPP

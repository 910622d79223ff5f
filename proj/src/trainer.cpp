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

#include "dfscil/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

#include "dfscil/errors.hpp"

namespace dfscil {

namespace {

// RNG stream ids. Each consumer owns a stream so that switching one feature
// off does not shift the random numbers another feature sees.
enum Stream : std::uint64_t {
  kExtractorInit = 10,
  kDictionaryInit = 11,
  kBasePrototypeInit = 12,
  kPseudoPrototypeInit = 13,
  kPlan = 14,
  kBaseShuffle = 15,
  kMixup = 16,
  kNovelShuffle = 100,
};

Matrix gather_rows(const Matrix& m, std::span<const std::size_t> idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(idx[i]));
  }
  return out;
}

std::vector<Label> gather_labels(const std::vector<Label>& labels, std::span<const std::size_t> idx) {
  std::vector<Label> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(labels[i]);
  return out;
}

[[noreturn]] void non_finite(std::size_t session, std::size_t step,
                             std::span<const std::size_t> batch) {
  std::ostringstream msg;
  msg << "non-finite loss in session " << session << " at step " << step << "; batch rows [";
  for (std::size_t i = 0; i < batch.size(); ++i) msg << (i ? "," : "") << batch[i];
  msg << "]";
  throw NumericalError(msg.str());
}

Matrix prototype_init(Eigen::Index rows, Eigen::Index atoms, std::size_t feature_dim, Rng& rng) {
  // Same distribution as the dictionary atoms.
  return gaussian_matrix(rows, atoms, 1.0 / std::sqrt(static_cast<double>(feature_dim)), rng);
}

}  // namespace

void ModelConfig::validate() const {
  if (feature_dim == 0) throw ConfigError("feature dimension d must be >= 1");
  if (atoms == 0) throw ConfigError("dictionary size m must be >= 1");
  for (std::size_t h : hidden) {
    if (h == 0) throw ConfigError("hidden layer widths must be >= 1");
  }
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("dictionary lambda must be > 0 (got " + std::to_string(lambda) + ")");
  }
  ClassifierConfig{tau}.validate();
}

void PseudoConfig::validate() const {
  if (!(gamma_lo > 0.0) || !(gamma_lo <= gamma_hi) || !(gamma_hi < 1.0)) {
    throw ConfigError("pseudo-class gamma range must satisfy 0 < lo <= hi < 1");
  }
}

void TrainerConfig::validate() const {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ConfigError("eta must be finite and >= 0");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be finite and >= 0");
  if (base_epochs < 0 || novel_epochs < 0) throw ConfigError("epoch counts must be >= 0");
  if (batch_size == 0) throw ConfigError("batch size must be >= 1");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must be in [0, 1)");
  base_lr.validate();
  novel_lr.validate();
}

ModelState ModelState::initialize(const ModelConfig& cfg, std::size_t input_dim,
                                  std::span<const Label> base_classes,
                                  std::optional<PseudoClassPlan> plan, std::uint64_t seed) {
  cfg.validate();
  if (input_dim == 0) throw ConfigError("input dimension must be >= 1");
  std::vector<Label> classes(base_classes.begin(), base_classes.end());
  std::sort(classes.begin(), classes.end());
  if (std::adjacent_find(classes.begin(), classes.end()) != classes.end()) {
    throw ConfigError("base classes contain duplicates");
  }
  if (classes.size() < 2) throw ConfigError("base session needs at least 2 classes");

  ModelState s;
  s.seed = seed;
  s.classifier.tau = cfg.tau;

  std::vector<std::size_t> widths{input_dim};
  widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
  widths.push_back(cfg.feature_dim);
  Rng extractor_rng = make_rng(seed, kExtractorInit);
  s.extractor = FeatureExtractor(widths, extractor_rng);

  const auto m = static_cast<Eigen::Index>(cfg.atoms);
  Rng dict_rng = make_rng(seed, kDictionaryInit);
  s.dictionary = Dictionary::random(m, static_cast<Eigen::Index>(cfg.feature_dim), cfg.lambda,
                                    dict_rng);

  Rng proto_rng = make_rng(seed, kBasePrototypeInit);
  Matrix base = prototype_init(static_cast<Eigen::Index>(classes.size()), m, cfg.feature_dim,
                               proto_rng);
  s.prototypes.emplace_back(0, classes, std::move(base));

  if (plan) {
    plan->validate();
    const std::set<Label> real(classes.begin(), classes.end());
    for (Label l : plan->pseudo_labels()) {
      if (real.count(l)) throw ConfigError("pseudo label " + std::to_string(l) + " collides with a base label");
    }
    for (const ClassPair& p : plan->pairs) {
      if (!real.count(p.first) || !real.count(p.second)) {
        throw ConfigError("pseudo-class pair references a non-base class");
      }
    }
    Rng pseudo_rng = make_rng(seed, kPseudoPrototypeInit);
    Matrix pv = prototype_init(static_cast<Eigen::Index>(plan->pairs.size()), m, cfg.feature_dim,
                               pseudo_rng);
    s.pseudo_prototypes.emplace(0, plan->pseudo_labels(), std::move(pv));
    s.plan = std::move(plan);
  }
  return s;
}

std::vector<const PrototypeSet*> ModelState::real_prototypes(std::size_t through_session) const {
  if (through_session >= prototypes.size()) {
    throw StateError("no prototypes for session " + std::to_string(through_session));
  }
  std::vector<const PrototypeSet*> out;
  for (std::size_t t = 0; t <= through_session; ++t) out.push_back(&prototypes[t]);
  return out;
}

std::vector<const PrototypeSet*> ModelState::real_prototypes() const {
  std::vector<const PrototypeSet*> out;
  for (const PrototypeSet& p : prototypes) out.push_back(&p);
  return out;
}

std::vector<Label> ModelState::seen_labels() const {
  std::vector<Label> out;
  for (const PrototypeSet& p : prototypes) out.insert(out.end(), p.labels().begin(), p.labels().end());
  std::sort(out.begin(), out.end());
  return out;
}

Matrix ModelState::coefficients(const Matrix& x) const {
  return solve_coefficients(dictionary, extractor.forward(x));
}

double ModelState::drift_norm() const {
  if (!anchor) throw StateError("drift is undefined before the base session has finished");
  return std::sqrt(drift_penalty(dictionary, *anchor));
}

PseudoClassPlan plan_for_stream(const SessionStream& stream, const PseudoConfig& cfg,
                                std::size_t batch_size, std::uint64_t seed) {
  cfg.validate();
  std::size_t novel = 0;
  for (std::size_t t = 1; t < stream.sessions.size(); ++t) {
    novel += stream.sessions[t].train.classes().size();
  }
  std::size_t count = cfg.classes;
  if (count == 0) count = novel;
  if (count == 0) {
    throw ConfigError("pseudo-class count defaults to the number of novel classes, and the stream has none");
  }
  const auto labels = stream.all_labels();
  const auto base = stream.base().train.classes();
  Rng rng = make_rng(seed, kPlan);
  PseudoClassPlan plan = make_plan(base, count, labels.back() + 1, rng);
  plan.gamma_lo = cfg.gamma_lo;
  plan.gamma_hi = cfg.gamma_hi;
  plan.per_class = cfg.per_class != 0 ? cfg.per_class : std::max<std::size_t>(1, batch_size / count);
  plan.validate();
  return plan;
}

ModelState initialize_for_stream(const SessionStream& stream, const ModelConfig& model,
                                 const PseudoConfig& pseudo, const TrainerConfig& trainer) {
  std::optional<PseudoClassPlan> plan;
  if (pseudo.enabled) plan = plan_for_stream(stream, pseudo, trainer.batch_size, trainer.seed);
  const auto base = stream.base().train.classes();
  return ModelState::initialize(model, stream.input_dim(), base, std::move(plan), trainer.seed);
}

BaseObjective base_objective(const ModelState& state, const Matrix& x, std::span<const Label> y,
                             const Synthesizer& synthesize, double eta) {
  const PrototypeSet& base = state.prototypes.at(0);
  FeatureExtractor::Trace trace;
  const Matrix features = state.extractor.forward_traced(x, trace);
  const CoefficientSolver solver(state.dictionary);
  const Matrix z = solver.solve(features);

  const PrototypeSet* base_only[] = {&base};
  NllResult cls = prototype_nll(z, y, base, base_only, state.classifier);

  BaseObjective out;
  out.cls = cls.loss;
  out.base_prototypes = cls.grad_targets + cls.grad_denominator[0];
  auto back = solver.backward(features, z, cls.grad_z);
  out.atoms = std::move(back.atoms);

  if (state.pseudo_prototypes && synthesize) {
    const PrototypeSet& pseudo = *state.pseudo_prototypes;
    out.pseudo_prototypes = Matrix::Zero(static_cast<Eigen::Index>(pseudo.size()), base.vectors().cols());
    const SyntheticBatch synth = synthesize(features);
    if (synth.features.rows() > 0) {
      const Matrix zs = solver.solve(synth.features);
      const PrototypeSet* both[] = {&base, &pseudo};
      NllResult pl = prototype_nll(zs, synth.labels, pseudo, both, state.classifier);
      out.pseudo = pl.loss;
      out.base_prototypes += eta * pl.grad_denominator[0];
      out.pseudo_prototypes = eta * (pl.grad_targets + pl.grad_denominator[1]);
      const Matrix upstream = eta * pl.grad_z;
      out.atoms += solver.backward(synth.features, zs, upstream).atoms;
    }
  }
  out.loss = out.cls + eta * out.pseudo;
  out.extractor = state.extractor.backward(trace, back.features);
  return out;
}

NovelObjective novel_objective(const Dictionary& dict, const Dictionary& anchor,
                               const Matrix& features, std::span<const Label> labels,
                               const PrototypeSet& current,
                               std::span<const PrototypeSet* const> denominator,
                               const ClassifierConfig& cls, double alpha) {
  const CoefficientSolver solver(dict);
  const Matrix z = solver.solve(features);
  NllResult nll = prototype_nll(z, labels, current, denominator, cls);

  NovelObjective out;
  out.cls = nll.loss;
  out.drift = drift_penalty(dict, anchor);
  out.loss = out.cls + alpha * out.drift;
  out.atoms_cls = solver.backward(features, z, nll.grad_z).atoms;
  out.atoms = out.atoms_cls + 2.0 * alpha * (dict.atoms() - anchor.atoms());
  out.prototypes = nll.grad_targets;
  for (std::size_t s = 0; s < denominator.size(); ++s) {
    if (denominator[s] == &current) out.prototypes += nll.grad_denominator[s];
  }
  return out;
}

TrainLog train_base(ModelState& state, const SessionDataset& data, const TrainerConfig& cfg,
                    const StepObserver& observer) {
  cfg.validate();
  if (state.cursor != 0) throw StateError("base session already trained");
  data.validate();
  if (data.size() == 0) throw ConfigError("base session has no training rows");
  const PrototypeSet& base = state.prototypes.at(0);
  for (Label l : data.classes()) {
    if (!base.index_of(l)) throw ConfigError("base label " + std::to_string(l) + " has no prototype");
    if (state.pseudo_prototypes && state.pseudo_prototypes->index_of(l)) {
      throw ConfigError("base label " + std::to_string(l) + " collides with a pseudo label");
    }
  }

  Rng shuffle_rng = make_rng(state.seed, kBaseShuffle);
  Rng mixup_rng = make_rng(state.seed, kMixup);
  std::vector<Label> yb;
  Synthesizer synthesize;
  if (state.plan) {
    synthesize = [&](const Matrix& f) { return mixup_batch(*state.plan, f, yb, mixup_rng); };
  }

  SgdMomentum sgd(cfg.momentum);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  TrainLog log;
  for (int epoch = 0; epoch < cfg.base_epochs; ++epoch) {
    const double lr = cfg.base_lr.at(epoch, cfg.base_epochs);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::span<const std::size_t> idx(order.data() + start,
                                             std::min(cfg.batch_size, order.size() - start));
      const Matrix xb = gather_rows(data.features, idx);
      yb = gather_labels(data.labels, idx);
      BaseObjective obj = base_objective(state, xb, yb, synthesize, cfg.eta);
      if (!std::isfinite(obj.loss)) non_finite(0, log.steps, idx);

      std::vector<Matrix*> params = state.extractor.mutable_parameters();
      Gradient grads = std::move(obj.extractor);
      params.push_back(&state.dictionary.mutable_atoms());
      grads.push_back(std::move(obj.atoms));
      params.push_back(&state.prototypes[0].mutable_vectors());
      grads.push_back(std::move(obj.base_prototypes));
      if (state.pseudo_prototypes) {
        params.push_back(&state.pseudo_prototypes->mutable_vectors());
        grads.push_back(std::move(obj.pseudo_prototypes));
      }
      sgd.step(params, grads, lr);

      loss_sum += obj.loss;
      ++batches;
      ++log.steps;
      if (observer) observer({0, epoch, log.steps, obj.loss, state});
    }
    log.epoch_loss.push_back(loss_sum / static_cast<double>(batches));
  }

  state.extractor.freeze();
  state.prototypes[0].freeze();
  if (state.pseudo_prototypes) state.pseudo_prototypes->freeze();
  state.anchor = state.dictionary;
  state.cursor = 1;
  return log;
}

TrainLog adapt_novel(ModelState& state, const SessionDataset& data, const TrainerConfig& cfg,
                     const StepObserver& observer) {
  cfg.validate();
  if (state.cursor == 0 || !state.anchor) {
    throw StateError("novel sessions require a trained base session");
  }
  if (!state.extractor.frozen()) throw StateError("extractor must be frozen in novel sessions");
  data.validate();
  if (data.size() == 0) throw ConfigError("novel session has no training rows");
  const std::size_t session = state.cursor;
  const auto classes = data.classes();
  const auto seen = state.seen_labels();
  for (Label l : classes) {
    if (std::binary_search(seen.begin(), seen.end(), l)) {
      throw ConfigError("session " + std::to_string(session) + ": label " + std::to_string(l) +
                        " was already seen");
    }
    if (state.pseudo_prototypes && state.pseudo_prototypes->index_of(l)) {
      throw ConfigError("session " + std::to_string(session) + ": label " + std::to_string(l) +
                        " collides with a pseudo label");
    }
  }

  const Matrix features = state.extractor.forward(data.features);
  const Matrix z = solve_coefficients(state.dictionary, features);
  state.prototypes.push_back(
      init_prototypes_from_means(z, data.labels, static_cast<int>(session), classes));
  PrototypeSet& current = state.prototypes.back();

  Rng shuffle_rng = make_rng(state.seed, kNovelShuffle + session);
  SgdMomentum sgd(cfg.momentum);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  TrainLog log;
  for (int epoch = 0; epoch < cfg.novel_epochs; ++epoch) {
    const double lr = cfg.novel_lr.at(epoch, cfg.novel_epochs);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::span<const std::size_t> idx(order.data() + start,
                                             std::min(cfg.batch_size, order.size() - start));
      const Matrix fb = gather_rows(features, idx);
      const std::vector<Label> yb = gather_labels(data.labels, idx);
      const auto denominator = state.real_prototypes(session);
      NovelObjective obj = novel_objective(state.dictionary, *state.anchor, fb, yb, current,
                                           denominator, state.classifier, cfg.alpha);
      if (!std::isfinite(obj.loss)) non_finite(session, log.steps, idx);

      Matrix* params[] = {&state.dictionary.mutable_atoms(), &current.mutable_vectors()};
      const Matrix grads[] = {std::move(obj.atoms_cls), std::move(obj.prototypes)};
      sgd.step(params, grads, lr);
      // Exact minimiser of lr * alpha * ||M - M0||^2 + ||M - M_half||^2 / 2.
      const double shrink = 2.0 * lr * cfg.alpha;
      Matrix& atoms = state.dictionary.mutable_atoms();
      atoms = (atoms + shrink * state.anchor->atoms()) / (1.0 + shrink);

      loss_sum += obj.loss;
      ++batches;
      ++log.steps;
      if (observer) observer({session, epoch, log.steps, obj.loss, state});
    }
    log.epoch_loss.push_back(loss_sum / static_cast<double>(batches));
  }
  current.freeze();
  state.cursor = session + 1;
  return log;
}

}  // namespace dfscil

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

#include "dfscil/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>

#include "dfscil/errors.hpp"

namespace dfscil {

namespace {

double norm_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// A prototype row addressed by (set, row) plus its cached norm.
struct ProtoRef {
  std::size_t set;
  std::size_t row;
  double norm;
};

}  // namespace

void ClassifierConfig::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw ConfigError("classifier tau must be > 0, got " + std::to_string(tau));
  }
}

PrototypeSet::PrototypeSet(int session, std::vector<Label> labels, Matrix vectors)
    : session_(session), labels_(std::move(labels)), vectors_(std::move(vectors)) {
  if (session_ < 0) throw ConfigError("prototype session id must be >= 0");
  if (static_cast<Eigen::Index>(labels_.size()) != vectors_.rows()) {
    throw ShapeError("prototype set: " + std::to_string(labels_.size()) + " labels for " +
                     std::to_string(vectors_.rows()) + " vectors");
  }
  std::set<Label> seen;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (!seen.insert(labels_[i]).second) {
      throw ConfigError("prototype set: duplicate label " + std::to_string(labels_[i]));
    }
    if (vectors_.row(static_cast<Eigen::Index>(i)).norm() <= kMinNorm) {
      throw NumericalError("prototype for label " + std::to_string(labels_[i]) +
                           " has zero norm");
    }
  }
}

std::span<const double> PrototypeSet::vector(std::size_t row) const {
  return row_span(vectors_, static_cast<Eigen::Index>(row));
}

std::optional<std::size_t> PrototypeSet::index_of(Label label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels_.begin());
}

Matrix& PrototypeSet::mutable_vectors() {
  if (frozen_) {
    throw StateError("prototype set of session " + std::to_string(session_) + " is frozen");
  }
  return vectors_;
}

std::span<const double> row_span(const Matrix& m, Eigen::Index row) {
  return {m.data() + row * m.cols(), static_cast<std::size_t>(m.cols())};
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("cosine: vector lengths differ");
  const double na = norm_of(a);
  const double nb = norm_of(b);
  if (na <= kMinNorm || nb <= kMinNorm) throw NumericalError("cosine: zero-norm argument");
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

NllResult prototype_nll(const Matrix& z, std::span<const Label> labels, const PrototypeSet& targets,
                        std::span<const PrototypeSet* const> denominator,
                        const ClassifierConfig& cfg, bool with_gradient) {
  cfg.validate();
  const Eigen::Index n = z.rows();
  const Eigen::Index m = z.cols();
  if (static_cast<Eigen::Index>(labels.size()) != n) {
    throw ShapeError("prototype_nll: label count does not match coefficient rows");
  }
  if (n == 0) throw ConfigError("prototype_nll: empty batch");
  if (targets.vectors().cols() != m) throw ShapeError("prototype_nll: target dimension mismatch");

  std::vector<ProtoRef> refs;
  for (std::size_t s = 0; s < denominator.size(); ++s) {
    const PrototypeSet& set = *denominator[s];
    if (set.vectors().cols() != m) throw ShapeError("prototype_nll: prototype dimension mismatch");
    for (std::size_t r = 0; r < set.size(); ++r) {
      const double nr = set.vectors().row(static_cast<Eigen::Index>(r)).norm();
      if (nr <= kMinNorm) throw NumericalError("prototype_nll: zero-norm prototype");
      refs.push_back({s, r, nr});
    }
  }
  if (refs.empty()) throw StateError("prototype_nll: empty denominator");

  NllResult out;
  if (with_gradient) {
    out.grad_z = Matrix::Zero(n, m);
    out.grad_targets = Matrix::Zero(static_cast<Eigen::Index>(targets.size()), m);
    for (const PrototypeSet* set : denominator) {
      out.grad_denominator.push_back(Matrix::Zero(static_cast<Eigen::Index>(set->size()), m));
    }
  }

  const double inv_tau = 1.0 / cfg.tau;
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> sims(refs.size());
  std::vector<double> weights(refs.size());
  double total = 0.0;

  for (Eigen::Index i = 0; i < n; ++i) {
    const auto target_row = targets.index_of(labels[static_cast<std::size_t>(i)]);
    if (!target_row) {
      throw LookupError("prototype_nll: no target prototype for label " +
                        std::to_string(labels[static_cast<std::size_t>(i)]));
    }
    const auto zi = row_span(z, i);
    const double zn = norm_of(zi);
    if (zn <= kMinNorm) {
      throw NumericalError("prototype_nll: zero-norm coefficient row " + std::to_string(i));
    }

    double max_logit = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < refs.size(); ++k) {
      const auto p = denominator[refs[k].set]->vector(refs[k].row);
      sims[k] = dot(zi, p) / (zn * refs[k].norm);
      max_logit = std::max(max_logit, sims[k] * inv_tau);
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < refs.size(); ++k) {
      weights[k] = std::exp(sims[k] * inv_tau - max_logit);
      sum += weights[k];
    }
    const auto tp = targets.vector(*target_row);
    const double tnorm = norm_of(tp);
    if (tnorm <= kMinNorm) throw NumericalError("prototype_nll: zero-norm target prototype");
    const double target_sim = dot(zi, tp) / (zn * tnorm);
    total += -(target_sim * inv_tau - max_logit - std::log(sum));

    if (!with_gradient) continue;

    // d cos(a,b)/da = (b/|b| - cos * a/|a|) / |a|
    auto grad_zi = out.grad_z.row(i);
    const Eigen::Map<const Eigen::RowVectorXd> zrow(zi.data(), m);
    auto accumulate = [&](std::span<const double> p, double pnorm, double coeff, double sim,
                          Eigen::Ref<Eigen::RowVectorXd> grad_p) {
      const Eigen::Map<const Eigen::RowVectorXd> prow(p.data(), m);
      grad_zi += coeff * (prow / pnorm - sim * zrow / zn) / zn;
      grad_p += coeff * (zrow / zn - sim * prow / pnorm) / pnorm;
    };
    for (std::size_t k = 0; k < refs.size(); ++k) {
      const double coeff = inv_n * inv_tau * (weights[k] / sum);
      accumulate(denominator[refs[k].set]->vector(refs[k].row), refs[k].norm, coeff, sims[k],
                 out.grad_denominator[refs[k].set].row(static_cast<Eigen::Index>(refs[k].row)));
    }
    accumulate(tp, tnorm, -inv_n * inv_tau, target_sim,
               out.grad_targets.row(static_cast<Eigen::Index>(*target_row)));
  }
  out.loss = total * inv_n;
  return out;
}

PrototypeSet init_prototypes_from_means(const Matrix& z, std::span<const Label> labels,
                                        int session) {
  std::set<Label> present(labels.begin(), labels.end());
  std::vector<Label> classes(present.begin(), present.end());
  return init_prototypes_from_means(z, labels, session, classes);
}

PrototypeSet init_prototypes_from_means(const Matrix& z, std::span<const Label> labels,
                                        int session, std::span<const Label> classes) {
  if (static_cast<Eigen::Index>(labels.size()) != z.rows()) {
    throw ShapeError("init_prototypes_from_means: label count does not match rows");
  }
  std::vector<Label> sorted(classes.begin(), classes.end());
  std::sort(sorted.begin(), sorted.end());
  std::map<Label, Eigen::Index> slot;
  for (std::size_t c = 0; c < sorted.size(); ++c) slot[sorted[c]] = static_cast<Eigen::Index>(c);

  Matrix sums = Matrix::Zero(static_cast<Eigen::Index>(sorted.size()), z.cols());
  std::vector<std::size_t> counts(sorted.size(), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto it = slot.find(labels[i]);
    if (it == slot.end()) continue;
    sums.row(it->second) += z.row(static_cast<Eigen::Index>(i));
    ++counts[static_cast<std::size_t>(it->second)];
  }
  for (std::size_t c = 0; c < sorted.size(); ++c) {
    if (counts[c] == 0) {
      throw ConfigError("init_prototypes_from_means: class " + std::to_string(sorted[c]) +
                        " has no instances");
    }
    sums.row(static_cast<Eigen::Index>(c)) /= static_cast<double>(counts[c]);
  }
  return PrototypeSet(session, std::move(sorted), std::move(sums));
}

Label predict(std::span<const double> z, std::span<const PrototypeSet* const> sets) {
  const double zn = norm_of(z);
  if (zn <= kMinNorm) throw NumericalError("predict: zero-norm coefficient vector");
  bool found = false;
  double best = 0.0;
  Label best_label = 0;
  for (const PrototypeSet* set : sets) {
    if (static_cast<std::size_t>(set->vectors().cols()) != z.size()) {
      throw ShapeError("predict: prototype dimension mismatch");
    }
    for (std::size_t r = 0; r < set->size(); ++r) {
      const auto p = set->vector(r);
      const double s = dot(z, p) / (zn * norm_of(p));
      const Label l = set->labels()[r];
      if (!found || s > best || (s == best && l < best_label)) {
        found = true;
        best = s;
        best_label = l;
      }
    }
  }
  if (!found) throw StateError("predict: no prototypes");
  return best_label;
}

}  // namespace dfscil

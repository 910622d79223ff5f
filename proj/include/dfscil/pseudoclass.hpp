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

#ifndef DFSCIL_PSEUDOCLASS_HPP
#define DFSCIL_PSEUDOCLASS_HPP

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "dfscil/classifier.hpp"
#include "dfscil/numerics.hpp"

namespace dfscil {

/// Two distinct base classes whose feature-space mixtures form one pseudo class.
struct ClassPair {
  Label first = 0;
  Label second = 0;
  Label pseudo = 0;

  friend bool operator==(const ClassPair&, const ClassPair&) = default;
};

/// Pseudo-class identities, fixed for a whole run. Instance pairs and mixing
/// coefficients are redrawn on every batch.
struct PseudoClassPlan {
  std::vector<ClassPair> pairs;
  double gamma_lo = 0.4;
  double gamma_hi = 0.6;
  std::size_t per_class = 1;  // synthetic rows per pseudo class per batch

  void validate() const;
  std::vector<Label> pseudo_labels() const;

  friend bool operator==(const PseudoClassPlan&, const PseudoClassPlan&) = default;
};

struct SyntheticBatch {
  Matrix features;
  std::vector<Label> labels;
  // Source rows (c1 row, c2 row) and gamma per emitted row.
  std::vector<std::pair<Eigen::Index, Eigen::Index>> sources;
  std::vector<double> gammas;
};

/// Samples `count` distinct unordered pairs of base classes (with replacement
/// only once every distinct pair is used) and labels them first_pseudo_label,
/// first_pseudo_label + 1, ...
PseudoClassPlan make_plan(std::span<const Label> base_classes, std::size_t count,
                          Label first_pseudo_label, Rng& rng);

/// For every pair whose two classes both occur in the batch, emits
/// plan.per_class rows gamma * f1 + (1 - gamma) * f2 with f1, f2 drawn
/// uniformly from the rows of each class and gamma ~ U[gamma_lo, gamma_hi].
SyntheticBatch mixup_batch(const PseudoClassPlan& plan, const Matrix& features,
                           std::span<const Label> labels, Rng& rng);

}  // namespace dfscil

#endif  // DFSCIL_PSEUDOCLASS_HPP

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

#ifndef DFSCIL_CLASSIFIER_HPP
#define DFSCIL_CLASSIFIER_HPP

#include <optional>
#include <span>
#include <vector>

#include "dfscil/numerics.hpp"

namespace dfscil {

using Label = int;

/// Norms at or below this are treated as zero by cosine similarity.
inline constexpr double kMinNorm = 1e-12;

struct ClassifierConfig {
  double tau = 0.1;

  /// Throws ConfigError unless tau > 0.
  void validate() const;
};

/// Learnable prototypes of one session, one row per class, in coefficient
/// space. Labels are unique within the set.
class PrototypeSet {
 public:
  PrototypeSet() = default;
  PrototypeSet(int session, std::vector<Label> labels, Matrix vectors);

  int session() const { return session_; }
  const std::vector<Label>& labels() const { return labels_; }
  const Matrix& vectors() const { return vectors_; }
  std::size_t size() const { return labels_.size(); }
  std::span<const double> vector(std::size_t row) const;
  std::optional<std::size_t> index_of(Label label) const;

  /// Throws StateError once frozen.
  Matrix& mutable_vectors();
  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

 private:
  int session_ = 0;
  std::vector<Label> labels_;
  Matrix vectors_;
  bool frozen_ = false;
};

std::span<const double> row_span(const Matrix& m, Eigen::Index row);

/// a.b / (|a||b|). Throws NumericalError when either norm is <= kMinNorm.
double cosine(std::span<const double> a, std::span<const double> b);

struct NllResult {
  double loss = 0.0;
  Matrix grad_z;                        // n x m
  Matrix grad_targets;                  // targets.size() x m
  std::vector<Matrix> grad_denominator; // one per denominator set
};

/// Mean cosine-softmax negative log-likelihood:
///   -(1/n) sum_i log( exp(cos(z_i, p_{y_i})/tau) / sum_{p in denominator} exp(cos(z_i, p)/tau) )
/// The numerator prototype is looked up in `targets`. When `targets` is also
/// one of the denominator sets the caller must add both gradient blocks.
NllResult prototype_nll(const Matrix& z, std::span<const Label> labels, const PrototypeSet& targets,
                        std::span<const PrototypeSet* const> denominator,
                        const ClassifierConfig& cfg, bool with_gradient = true);

/// Per-class coefficient means, classes in ascending label order.
PrototypeSet init_prototypes_from_means(const Matrix& z, std::span<const Label> labels,
                                        int session);

/// As above, but every label in `classes` must have at least one instance.
PrototypeSet init_prototypes_from_means(const Matrix& z, std::span<const Label> labels,
                                        int session, std::span<const Label> classes);

/// Label of the most cosine-similar prototype across all sets; exact ties go
/// to the lowest label.
Label predict(std::span<const double> z, std::span<const PrototypeSet* const> sets);

}  // namespace dfscil

#endif  // DFSCIL_CLASSIFIER_HPP

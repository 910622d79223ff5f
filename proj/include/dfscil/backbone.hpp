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

#ifndef DFSCIL_BACKBONE_HPP
#define DFSCIL_BACKBONE_HPP

#include <cstddef>
#include <vector>

#include "dfscil/numerics.hpp"

namespace dfscil {

/// Multilayer perceptron mapping raw input rows to d-dimensional features.
///
/// Layer i maps widths[i] -> widths[i+1] as h = x * W_i^T + b_i. Hidden layers
/// are rectified; the output layer is left linear, so features are not
/// constrained to the positive orthant.
class FeatureExtractor {
 public:
  /// Activations recorded by forward_traced, consumed by backward.
  struct Trace {
    std::vector<Matrix> inputs;  // input to each layer
    std::vector<Matrix> pre;     // pre-activation output of each layer
  };

  FeatureExtractor() = default;

  /// Glorot-uniform weights, zero biases.
  FeatureExtractor(std::vector<std::size_t> widths, Rng& rng);

  /// Explicit weights (rows = fan_out, cols = fan_in) and 1 x fan_out biases.
  FeatureExtractor(std::vector<Matrix> weights, std::vector<Matrix> biases);

  const std::vector<std::size_t>& widths() const { return widths_; }
  std::size_t input_dim() const { return widths_.front(); }
  std::size_t output_dim() const { return widths_.back(); }
  std::size_t layer_count() const { return weights_.size(); }
  const Matrix& weight(std::size_t layer) const { return weights_.at(layer); }
  const Matrix& bias(std::size_t layer) const { return biases_.at(layer); }

  Matrix forward(const Matrix& x) const;
  Matrix forward_traced(const Matrix& x, Trace& trace) const;

  /// Gradient of sum(upstream .* forward(x)) with respect to
  /// [W_0, b_0, W_1, b_1, ...]. Throws StateError once frozen.
  Gradient backward(const Trace& trace, const Matrix& upstream) const;

  /// Irreversible. Idempotent.
  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

  /// Parameter blocks in backward() order. Throws StateError once frozen.
  std::vector<Matrix*> mutable_parameters();
  std::vector<const Matrix*> parameters() const;

 private:
  void validate() const;

  std::vector<std::size_t> widths_;
  std::vector<Matrix> weights_;
  std::vector<Matrix> biases_;
  bool frozen_ = false;
};

}  // namespace dfscil

#endif  // DFSCIL_BACKBONE_HPP

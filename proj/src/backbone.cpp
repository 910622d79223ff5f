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

#include "dfscil/backbone.hpp"

#include <cmath>
#include <string>

#include "dfscil/errors.hpp"

namespace dfscil {

FeatureExtractor::FeatureExtractor(std::vector<std::size_t> widths, Rng& rng)
    : widths_(std::move(widths)) {
  if (widths_.size() < 2) throw ConfigError("extractor needs at least input and output widths");
  for (std::size_t w : widths_) {
    if (w == 0) throw ConfigError("extractor layer width must be positive");
  }
  for (std::size_t i = 0; i + 1 < widths_.size(); ++i) {
    const auto fan_in = static_cast<Eigen::Index>(widths_[i]);
    const auto fan_out = static_cast<Eigen::Index>(widths_[i + 1]);
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Matrix w(fan_out, fan_in);
    for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = dist(rng);
    weights_.push_back(std::move(w));
    biases_.push_back(Matrix::Zero(1, fan_out));
  }
}

FeatureExtractor::FeatureExtractor(std::vector<Matrix> weights, std::vector<Matrix> biases)
    : weights_(std::move(weights)), biases_(std::move(biases)) {
  if (weights_.empty() || weights_.size() != biases_.size()) {
    throw ShapeError("extractor needs one bias per weight matrix and at least one layer");
  }
  widths_.push_back(static_cast<std::size_t>(weights_.front().cols()));
  for (const Matrix& w : weights_) widths_.push_back(static_cast<std::size_t>(w.rows()));
  validate();
}

void FeatureExtractor::validate() const {
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (static_cast<std::size_t>(weights_[i].cols()) != widths_[i] ||
        static_cast<std::size_t>(weights_[i].rows()) != widths_[i + 1]) {
      throw ShapeError("extractor layer " + std::to_string(i) + " weight shape does not compose");
    }
    if (biases_[i].rows() != 1 || static_cast<std::size_t>(biases_[i].cols()) != widths_[i + 1]) {
      throw ShapeError("extractor layer " + std::to_string(i) + " bias shape mismatch");
    }
  }
}

Matrix FeatureExtractor::forward(const Matrix& x) const {
  Trace unused;
  return forward_traced(x, unused);
}

Matrix FeatureExtractor::forward_traced(const Matrix& x, Trace& trace) const {
  if (static_cast<std::size_t>(x.cols()) != input_dim()) {
    throw ShapeError("extractor forward: input has " + std::to_string(x.cols()) +
                     " columns, expected " + std::to_string(input_dim()));
  }
  trace.inputs.clear();
  trace.pre.clear();
  Matrix h = x;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    Matrix pre = h * weights_[i].transpose();
    pre.rowwise() += biases_[i].row(0);
    trace.inputs.push_back(std::move(h));
    const bool last = i + 1 == weights_.size();
    h = last ? pre : Matrix(pre.cwiseMax(0.0));
    trace.pre.push_back(std::move(pre));
  }
  return h;
}

Gradient FeatureExtractor::backward(const Trace& trace, const Matrix& upstream) const {
  if (frozen_) throw StateError("extractor backward: extractor is frozen");
  if (trace.pre.size() != weights_.size()) {
    throw StateError("extractor backward: no forward trace for this extractor");
  }
  const Matrix& out = trace.pre.back();
  if (upstream.rows() != out.rows() || upstream.cols() != out.cols()) {
    throw ShapeError("extractor backward: upstream shape does not match output");
  }
  Gradient grad(2 * weights_.size());
  Matrix delta = upstream;
  for (std::size_t li = weights_.size(); li-- > 0;) {
    if (li + 1 != weights_.size()) {
      delta = delta.cwiseProduct((trace.pre[li].array() > 0.0).cast<double>().matrix());
    }
    grad[2 * li] = delta.transpose() * trace.inputs[li];
    grad[2 * li + 1] = delta.colwise().sum();
    if (li > 0) delta = delta * weights_[li];
  }
  return grad;
}

std::vector<Matrix*> FeatureExtractor::mutable_parameters() {
  if (frozen_) throw StateError("extractor parameters are frozen");
  std::vector<Matrix*> out;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    out.push_back(&weights_[i]);
    out.push_back(&biases_[i]);
  }
  return out;
}

std::vector<const Matrix*> FeatureExtractor::parameters() const {
  std::vector<const Matrix*> out;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    out.push_back(&weights_[i]);
    out.push_back(&biases_[i]);
  }
  return out;
}

}  // namespace dfscil

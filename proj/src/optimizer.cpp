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

#include "dfscil/optimizer.hpp"

#include <cmath>
#include <numbers>

#include "dfscil/errors.hpp"

namespace dfscil {

ScheduleKind parse_schedule_kind(const std::string& name) {
  if (name == "cosine") return ScheduleKind::cosine;
  if (name == "step") return ScheduleKind::step;
  if (name == "constant") return ScheduleKind::constant;
  throw ConfigError("unknown learning-rate schedule '" + name + "'");
}

std::string to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::cosine: return "cosine";
    case ScheduleKind::step: return "step";
    case ScheduleKind::constant: return "constant";
  }
  return "unknown";
}

void LrSchedule::validate() const {
  if (!(initial >= 0.0) || !std::isfinite(initial)) {
    throw ConfigError("learning rate must be finite and >= 0");
  }
  if (kind == ScheduleKind::step && (!(step_factor > 0.0) || step_every < 1)) {
    throw ConfigError("step-decay schedule needs factor > 0 and every >= 1");
  }
}

double LrSchedule::at(int epoch, int total_epochs) const {
  switch (kind) {
    case ScheduleKind::constant:
      return initial;
    case ScheduleKind::step:
      return initial * std::pow(step_factor, epoch / step_every);
    case ScheduleKind::cosine:
      if (total_epochs <= 0) return initial;
      if (epoch >= total_epochs) return 0.0;
      return initial * (1.0 + std::cos(std::numbers::pi * epoch / total_epochs)) / 2.0;
  }
  return initial;
}

SgdMomentum::SgdMomentum(double momentum) : momentum_(momentum) {
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must be in [0, 1)");
}

void SgdMomentum::step(std::span<Matrix* const> params, std::span<const Matrix> grads, double lr) {
  if (params.size() != grads.size()) {
    throw ShapeError("sgd: " + std::to_string(grads.size()) + " gradients for " +
                     std::to_string(params.size()) + " parameters");
  }
  if (velocity_.empty()) {
    for (const Matrix* p : params) velocity_.push_back(Matrix::Zero(p->rows(), p->cols()));
  }
  if (velocity_.size() != params.size()) {
    throw ShapeError("sgd: parameter list changed between steps");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& theta = *params[i];
    const Matrix& g = grads[i];
    if (g.rows() != theta.rows() || g.cols() != theta.cols() ||
        velocity_[i].rows() != theta.rows() || velocity_[i].cols() != theta.cols()) {
      throw ShapeError("sgd: gradient block " + std::to_string(i) + " shape mismatch");
    }
    velocity_[i] = momentum_ * velocity_[i] - lr * g;
    theta += velocity_[i];
  }
}

}  // namespace dfscil

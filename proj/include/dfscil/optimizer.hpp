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

#ifndef DFSCIL_OPTIMIZER_HPP
#define DFSCIL_OPTIMIZER_HPP

#include <span>
#include <string>
#include <vector>

#include "dfscil/numerics.hpp"

namespace dfscil {

enum class ScheduleKind { constant, cosine, step };

ScheduleKind parse_schedule_kind(const std::string& name);
std::string to_string(ScheduleKind kind);

/// Per-epoch learning rate.
///   cosine:   lr0 * (1 + cos(pi * epoch / total)) / 2
///   step:     lr0 * factor^floor(epoch / every)
///   constant: lr0
struct LrSchedule {
  ScheduleKind kind = ScheduleKind::cosine;
  double initial = 0.05;
  double step_factor = 0.25;
  int step_every = 50;

  void validate() const;
  double at(int epoch, int total_epochs) const;
};

/// Heavy-ball SGD: v <- mu v - lr g; theta <- theta + v. Velocities start at
/// zero and are bound to parameter positions on the first step.
class SgdMomentum {
 public:
  explicit SgdMomentum(double momentum);

  void step(std::span<Matrix* const> params, std::span<const Matrix> grads, double lr);

  double momentum() const { return momentum_; }
  const std::vector<Matrix>& velocity() const { return velocity_; }

 private:
  double momentum_;
  std::vector<Matrix> velocity_;
};

}  // namespace dfscil

#endif  // DFSCIL_OPTIMIZER_HPP

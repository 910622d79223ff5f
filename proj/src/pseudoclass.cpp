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

#include "dfscil/pseudoclass.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>

#include "dfscil/errors.hpp"

namespace dfscil {

void PseudoClassPlan::validate() const {
  if (!(gamma_lo > 0.0) || !(gamma_lo <= gamma_hi) || !(gamma_hi < 1.0)) {
    throw ConfigError("pseudo-class gamma range must satisfy 0 < lo <= hi < 1");
  }
  if (per_class == 0) throw ConfigError("pseudo-class rows per class must be >= 1");
  std::set<Label> seen;
  for (const ClassPair& p : pairs) {
    if (p.first == p.second) throw ConfigError("pseudo-class pair mixes a class with itself");
    if (!seen.insert(p.pseudo).second) {
      throw ConfigError("duplicate pseudo label " + std::to_string(p.pseudo));
    }
  }
}

std::vector<Label> PseudoClassPlan::pseudo_labels() const {
  std::vector<Label> out;
  out.reserve(pairs.size());
  for (const ClassPair& p : pairs) out.push_back(p.pseudo);
  return out;
}

PseudoClassPlan make_plan(std::span<const Label> base_classes, std::size_t count,
                          Label first_pseudo_label, Rng& rng) {
  std::vector<Label> classes(base_classes.begin(), base_classes.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  if (classes.size() < 2) throw ConfigError("pseudo classes need at least 2 base classes");
  if (count == 0) throw ConfigError("pseudo class count must be >= 1");
  if (first_pseudo_label <= classes.back()) {
    throw ConfigError("pseudo labels must start above every base label");
  }

  std::vector<std::pair<Label, Label>> all;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    for (std::size_t j = i + 1; j < classes.size(); ++j) all.emplace_back(classes[i], classes[j]);
  }
  std::shuffle(all.begin(), all.end(), rng);

  PseudoClassPlan plan;
  std::uniform_int_distribution<std::size_t> any(0, all.size() - 1);
  for (std::size_t k = 0; k < count; ++k) {
    const auto& pr = k < all.size() ? all[k] : all[any(rng)];
    plan.pairs.push_back({pr.first, pr.second, first_pseudo_label + static_cast<Label>(k)});
  }
  return plan;
}

SyntheticBatch mixup_batch(const PseudoClassPlan& plan, const Matrix& features,
                           std::span<const Label> labels, Rng& rng) {
  plan.validate();
  if (features.rows() == 0) throw ConfigError("mixup_batch: empty feature batch");
  if (static_cast<Eigen::Index>(labels.size()) != features.rows()) {
    throw ShapeError("mixup_batch: label count does not match feature rows");
  }
  std::map<Label, std::vector<Eigen::Index>> rows_of;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    rows_of[labels[i]].push_back(static_cast<Eigen::Index>(i));
  }

  SyntheticBatch out;
  std::vector<Label> emitted;
  std::uniform_real_distribution<double> gamma_dist(plan.gamma_lo, plan.gamma_hi);
  for (const ClassPair& pair : plan.pairs) {
    auto a = rows_of.find(pair.first);
    auto b = rows_of.find(pair.second);
    if (a == rows_of.end() || b == rows_of.end()) continue;
    std::uniform_int_distribution<std::size_t> pick_a(0, a->second.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_b(0, b->second.size() - 1);
    for (std::size_t k = 0; k < plan.per_class; ++k) {
      const Eigen::Index ra = a->second[pick_a(rng)];
      const Eigen::Index rb = b->second[pick_b(rng)];
      const double gamma = plan.gamma_lo == plan.gamma_hi ? plan.gamma_lo : gamma_dist(rng);
      out.sources.emplace_back(ra, rb);
      out.gammas.push_back(gamma);
      emitted.push_back(pair.pseudo);
    }
  }
  out.features.resize(static_cast<Eigen::Index>(emitted.size()), features.cols());
  for (std::size_t r = 0; r < emitted.size(); ++r) {
    const double g = out.gammas[r];
    out.features.row(static_cast<Eigen::Index>(r)) =
        g * features.row(out.sources[r].first) + (1.0 - g) * features.row(out.sources[r].second);
  }
  out.labels = std::move(emitted);
  return out;
}

}  // namespace dfscil

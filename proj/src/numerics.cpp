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

#include "dfscil/numerics.hpp"

#include <cmath>
#include <string>

#include "dfscil/errors.hpp"

namespace dfscil {

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  Matrix out(rows, cols);
  for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] = dist(rng);
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " by " +
                     std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
  Matrix out = a * b;
  return out;
}

double frobenius_sq(const Matrix& a) { return a.squaredNorm(); }

bool all_finite(const Matrix& a) { return a.allFinite(); }

Cholesky::Cholesky(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw ShapeError("cholesky: matrix is " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + ", expected square");
  }
  const Eigen::Index n = a.rows();
  lower_ = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double diag = a(j, j);
    for (Eigen::Index k = 0; k < j; ++k) diag -= lower_(j, k) * lower_(j, k);
    if (!(diag > 0.0) || !std::isfinite(diag)) {
      throw NumericalError("cholesky: non-positive pivot " + std::to_string(diag) +
                           " at index " + std::to_string(j));
    }
    const double ljj = std::sqrt(diag);
    lower_(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= lower_(i, k) * lower_(j, k);
      lower_(i, j) = s / ljj;
    }
  }
}

Matrix Cholesky::solve(const Matrix& b) const {
  const Eigen::Index n = lower_.rows();
  if (b.rows() != n) {
    throw ShapeError("cholesky solve: rhs has " + std::to_string(b.rows()) +
                     " rows, system has " + std::to_string(n));
  }
  Matrix x = b;
  // L y = b
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < i; ++k) x.row(i) -= lower_(i, k) * x.row(k);
    x.row(i) /= lower_(i, i);
  }
  // L^T x = y
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    for (Eigen::Index k = i + 1; k < n; ++k) x.row(i) -= lower_(k, i) * x.row(k);
    x.row(i) /= lower_(i, i);
  }
  return x;
}

Matrix spd_solve(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("spd_solve: a has " + std::to_string(a.rows()) +
                     " rows, b has " + std::to_string(b.rows()));
  }
  return Cholesky(a).solve(b);
}

double grad_check(const DifferentiableFn& f, std::span<const Matrix> params, double step) {
  std::vector<Matrix> work(params.begin(), params.end());
  Gradient analytic;
  const double base = f(work, &analytic);
  if (!std::isfinite(base)) throw NumericalError("grad_check: non-finite loss at params");
  if (analytic.size() != work.size()) {
    throw ShapeError("grad_check: function returned " + std::to_string(analytic.size()) +
                     " gradient blocks for " + std::to_string(work.size()) + " parameters");
  }
  double worst = 0.0;
  for (std::size_t p = 0; p < work.size(); ++p) {
    if (analytic[p].rows() != work[p].rows() || analytic[p].cols() != work[p].cols()) {
      throw ShapeError("grad_check: gradient block " + std::to_string(p) +
                       " does not match its parameter shape");
    }
    for (Eigen::Index i = 0; i < work[p].size(); ++i) {
      double& x = work[p].data()[i];
      const double saved = x;
      x = saved + step;
      const double up = f(work, nullptr);
      x = saved - step;
      const double down = f(work, nullptr);
      x = saved;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw NumericalError("grad_check: non-finite loss perturbing block " +
                             std::to_string(p) + " entry " + std::to_string(i));
      }
      const double numeric = (up - down) / (2.0 * step);
      const double err =
          std::abs(analytic[p].data()[i] - numeric) / (std::abs(numeric) + 1e-8);
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace dfscil

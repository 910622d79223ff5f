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

#ifndef DFSCIL_NUMERICS_HPP
#define DFSCIL_NUMERICS_HPP

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace dfscil {

/// Dense row-major 64-bit matrix. Row i of a data matrix is instance i.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// One gradient block per learnable parameter block, shape-matched.
using Gradient = std::vector<Matrix>;

using Rng = std::mt19937_64;

/// Independent, reproducible generator for one consumer (init, shuffling,
/// mixup...) derived from the run seed.
Rng make_rng(std::uint64_t seed, std::uint64_t stream);

/// Matrix with i.i.d. N(0, stddev^2) entries.
Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng);

/// Standard matrix product. Throws ShapeError when a.cols != b.rows.
Matrix matmul(const Matrix& a, const Matrix& b);

/// Frobenius norm squared.
double frobenius_sq(const Matrix& a);

bool all_finite(const Matrix& a);

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
/// Factor once, then solve against as many right-hand sides as needed.
class Cholesky {
 public:
  /// Throws NumericalError naming the pivot index on a non-positive pivot.
  explicit Cholesky(const Matrix& a);

  /// Returns X with A·X == b.
  Matrix solve(const Matrix& b) const;

  Eigen::Index size() const { return lower_.rows(); }

 private:
  Matrix lower_;
};

/// Solves a·X == b for SPD a without forming an inverse.
Matrix spd_solve(const Matrix& a, const Matrix& b);

/// Differentiable scalar function of a list of parameter blocks. When `grad`
/// is non-null the function fills it with one block per parameter.
using DifferentiableFn =
    std::function<double(std::span<const Matrix> params, Gradient* grad)>;

/// Compares the analytic gradient of `f` against central differences with
/// the given step. Returns max over all entries of
/// |analytic - numeric| / (|numeric| + 1e-8).
double grad_check(const DifferentiableFn& f, std::span<const Matrix> params,
                  double step = 1e-4);

}  // namespace dfscil

#endif  // DFSCIL_NUMERICS_HPP

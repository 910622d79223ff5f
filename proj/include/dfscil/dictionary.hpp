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

#ifndef DFSCIL_DICTIONARY_HPP
#define DFSCIL_DICTIONARY_HPP

#include "dfscil/numerics.hpp"

namespace dfscil {

/// m x d atom matrix M with ridge weight lambda. Row k is atom k.
class Dictionary {
 public:
  Dictionary() = default;
  /// Throws ConfigError for lambda < 0 or non-finite atoms.
  Dictionary(Matrix atoms, double lambda);

  /// Atoms i.i.d. N(0, 1/d).
  static Dictionary random(Eigen::Index atoms, Eigen::Index dim, double lambda, Rng& rng);

  const Matrix& atoms() const { return atoms_; }
  Matrix& mutable_atoms() { return atoms_; }
  Eigen::Index m() const { return atoms_.rows(); }
  Eigen::Index d() const { return atoms_.cols(); }
  double lambda() const { return lambda_; }

 private:
  Matrix atoms_;
  double lambda_ = 0.0;
};

/// The factored ridge system S = M M^T + lambda I for one dictionary state.
/// Build once per step and reuse it for the forward solve and the adjoints.
class CoefficientSolver {
 public:
  /// Throws ConfigError when lambda == 0.
  explicit CoefficientSolver(const Dictionary& dict);

  /// Z = F M^T S^{-1}; row i minimises ||f_i - z_i^T M||^2 + lambda ||z_i||^2.
  Matrix solve(const Matrix& features) const;

  struct Backward {
    Matrix atoms;     // m x d
    Matrix features;  // n x d
  };

  /// Gradients of sum(upstream .* Z) w.r.t. M and F, with Z = solve(features)
  /// passed in so it is not recomputed.
  Backward backward(const Matrix& features, const Matrix& z, const Matrix& upstream) const;

 private:
  const Dictionary* dict_;
  Cholesky system_;
};

Matrix solve_coefficients(const Dictionary& dict, const Matrix& features);

/// Gradients of sum(upstream .* Z(M, F)) through the closed-form solve.
CoefficientSolver::Backward coefficients_backward(const Dictionary& dict, const Matrix& features,
                                                  const Matrix& upstream);

/// ||F - Z M||_F^2 + lambda ||Z||_F^2.
double reconstruction_loss(const Dictionary& dict, const Matrix& features, const Matrix& z);

struct ReconstructionGradient {
  Matrix z;
  Matrix atoms;
  Matrix features;
};

/// Partial derivatives of reconstruction_loss with Z, M and F independent.
ReconstructionGradient reconstruction_gradient(const Dictionary& dict, const Matrix& features,
                                               const Matrix& z);

/// ||M - M0||_F^2. The caller applies the alpha weight.
double drift_penalty(const Dictionary& dict, const Dictionary& anchor);

}  // namespace dfscil

#endif  // DFSCIL_DICTIONARY_HPP

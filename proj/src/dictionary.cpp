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

#include "dfscil/dictionary.hpp"

#include <cmath>
#include <string>

#include "dfscil/errors.hpp"

namespace dfscil {

namespace {

Cholesky factor_system(const Dictionary& dict) {
  if (!(dict.lambda() > 0.0)) {
    throw ConfigError("coefficient solve requires lambda > 0, got " +
                      std::to_string(dict.lambda()));
  }
  Matrix s = dict.atoms() * dict.atoms().transpose();
  s.diagonal().array() += dict.lambda();
  return Cholesky(s);
}

void check_features(const Dictionary& dict, const Matrix& features, const char* op) {
  if (features.cols() != dict.d()) {
    throw ShapeError(std::string(op) + ": features have " + std::to_string(features.cols()) +
                     " columns, dictionary atoms have " + std::to_string(dict.d()));
  }
}

}  // namespace

Dictionary::Dictionary(Matrix atoms, double lambda) : atoms_(std::move(atoms)), lambda_(lambda) {
  if (!(lambda_ >= 0.0) || !std::isfinite(lambda_)) {
    throw ConfigError("dictionary lambda must be finite and >= 0");
  }
  if (atoms_.rows() == 0 || atoms_.cols() == 0) throw ConfigError("dictionary must be non-empty");
  if (!atoms_.allFinite()) throw NumericalError("dictionary atoms must be finite");
}

Dictionary Dictionary::random(Eigen::Index atoms, Eigen::Index dim, double lambda, Rng& rng) {
  if (atoms < 1 || dim < 1) throw ConfigError("dictionary needs m >= 1 and d >= 1");
  return Dictionary(gaussian_matrix(atoms, dim, 1.0 / std::sqrt(static_cast<double>(dim)), rng),
                    lambda);
}

CoefficientSolver::CoefficientSolver(const Dictionary& dict)
    : dict_(&dict), system_(factor_system(dict)) {}

Matrix CoefficientSolver::solve(const Matrix& features) const {
  check_features(*dict_, features, "solve_coefficients");
  // S Z^T = M F^T
  Matrix rhs = dict_->atoms() * features.transpose();
  return system_.solve(rhs).transpose();
}

CoefficientSolver::Backward CoefficientSolver::backward(const Matrix& features, const Matrix& z,
                                                        const Matrix& upstream) const {
  check_features(*dict_, features, "coefficients_backward");
  if (upstream.rows() != features.rows() || upstream.cols() != dict_->m() ||
      z.rows() != upstream.rows() || z.cols() != upstream.cols()) {
    throw ShapeError("coefficients_backward: upstream must be n x m matching Z");
  }
  const Matrix& atoms = dict_->atoms();
  // H = G S^{-1}
  const Matrix h = system_.solve(upstream.transpose()).transpose();
  Backward out;
  out.features = h * atoms;
  const Matrix k = h.transpose() * z;
  out.atoms = h.transpose() * features - (k + k.transpose()) * atoms;
  return out;
}

Matrix solve_coefficients(const Dictionary& dict, const Matrix& features) {
  return CoefficientSolver(dict).solve(features);
}

CoefficientSolver::Backward coefficients_backward(const Dictionary& dict, const Matrix& features,
                                                  const Matrix& upstream) {
  CoefficientSolver solver(dict);
  return solver.backward(features, solver.solve(features), upstream);
}

double reconstruction_loss(const Dictionary& dict, const Matrix& features, const Matrix& z) {
  check_features(dict, features, "reconstruction_loss");
  if (z.rows() != features.rows() || z.cols() != dict.m()) {
    throw ShapeError("reconstruction_loss: Z must be n x m");
  }
  return (features - z * dict.atoms()).squaredNorm() + dict.lambda() * z.squaredNorm();
}

ReconstructionGradient reconstruction_gradient(const Dictionary& dict, const Matrix& features,
                                               const Matrix& z) {
  check_features(dict, features, "reconstruction_gradient");
  if (z.rows() != features.rows() || z.cols() != dict.m()) {
    throw ShapeError("reconstruction_gradient: Z must be n x m");
  }
  const Matrix residual = features - z * dict.atoms();
  ReconstructionGradient g;
  g.z = -2.0 * residual * dict.atoms().transpose() + 2.0 * dict.lambda() * z;
  g.atoms = -2.0 * z.transpose() * residual;
  g.features = 2.0 * residual;
  return g;
}

double drift_penalty(const Dictionary& dict, const Dictionary& anchor) {
  if (dict.m() != anchor.m() || dict.d() != anchor.d()) {
    throw ShapeError("drift_penalty: dictionary and anchor shapes differ");
  }
  return (dict.atoms() - anchor.atoms()).squaredNorm();
}

}  // namespace dfscil

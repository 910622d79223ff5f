#include <doctest.h>

#include "dfscil/dictionary.hpp"
#include "dfscil/errors.hpp"
#include "oracles.hpp"

using namespace dfscil;

namespace {

double scalar_recon(const Matrix& m, double lambda, const Matrix& f, const Matrix& z) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    for (Eigen::Index t = 0; t < f.cols(); ++t) {
      double r = f(i, t);
      for (Eigen::Index k = 0; k < m.rows(); ++k) r -= z(i, k) * m(k, t);
      s += r * r;
    }
    for (Eigen::Index k = 0; k < m.rows(); ++k) s += lambda * z(i, k) * z(i, k);
  }
  return s;
}

}  // namespace

TEST_CASE("identity dictionary halves features at lambda 1") {
  Rng rng = make_rng(1, 0);
  const Matrix f = oracle::random_matrix(5, 4, rng);
  const Dictionary dict(Matrix::Identity(4, 4), 1.0);
  CHECK(oracle::frob(solve_coefficients(dict, f) - f / 2.0) < 1e-15);
}

TEST_CASE("zero features give zero coefficients") {
  Rng rng = make_rng(2, 0);
  const Dictionary dict(oracle::random_matrix(3, 4, rng), 0.1);
  CHECK(solve_coefficients(dict, Matrix::Zero(5, 4)).isZero());
}

TEST_CASE("lambda validation") {
  CHECK_THROWS_AS(Dictionary(Matrix::Identity(2, 2), -1.0), ConfigError);
  const Dictionary zero(Matrix::Identity(2, 2), 0.0);
  CHECK_THROWS_AS(solve_coefficients(zero, Matrix::Ones(1, 2)), ConfigError);
  CHECK_THROWS_AS(CoefficientSolver{zero}, ConfigError);
}

TEST_CASE("solve rejects feature width mismatch") {
  const Dictionary dict(Matrix::Identity(3, 3), 0.1);
  CHECK_THROWS_AS(solve_coefficients(dict, Matrix::Ones(2, 4)), ShapeError);
}

TEST_CASE("random 3x4 dictionary matches gradient descent") {
  Rng rng = make_rng(3, 0);
  const Dictionary dict(oracle::random_matrix(3, 4, rng), 0.1);
  const Matrix f = oracle::random_matrix(5, 4, rng);
  const Matrix z = solve_coefficients(dict, f);
  const Matrix want = oracle::ridge_by_gradient_descent(dict.atoms(), f, 0.1);
  CHECK(oracle::frob(z - want) < 1e-6);
}

TEST_CASE("closed form matches gradient descent and is stationary") {
  const double lambdas[] = {0.01, 0.1, 1.0};
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    Rng rng = make_rng(seed, 3);
    std::uniform_int_distribution<int> size(1, 10);
    const int m = size(rng), d = size(rng), n = size(rng);
    const double lambda = lambdas[seed % 3];
    const Dictionary dict(oracle::random_matrix(m, d, rng), lambda);
    const Matrix f = oracle::random_matrix(n, d, rng);
    const Matrix z = solve_coefficients(dict, f);
    const Matrix want = oracle::ridge_by_gradient_descent(dict.atoms(), f, lambda);
    CHECK(oracle::frob(z - want) / oracle::frob(want) < 1e-5);
    const ReconstructionGradient g = reconstruction_gradient(dict, f, z);
    CHECK(oracle::frob(g.z) < 1e-8 * (1.0 + oracle::frob(f)));
  }
}

TEST_CASE("perturbing the minimizer increases the loss") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng = make_rng(seed, 4);
    const Dictionary dict(oracle::random_matrix(4, 6, rng), 0.1);
    const Matrix f = oracle::random_matrix(5, 6, rng);
    const Matrix z = solve_coefficients(dict, f);
    const double base = reconstruction_loss(dict, f, z);
    Matrix dir = gaussian_matrix(5, 4, 1.0, rng);
    dir *= 1e-3 / dir.norm();
    CHECK(reconstruction_loss(dict, f, z + dir) > base);
  }
}

TEST_CASE("reconstruction_loss examples") {
  const Dictionary id(Matrix::Identity(3, 3), 0.0);
  CHECK(reconstruction_loss(id, Matrix::Zero(2, 3), Matrix::Zero(2, 3)) == 0.0);
  Rng rng = make_rng(5, 0);
  const Matrix f = oracle::random_matrix(2, 3, rng);
  CHECK(reconstruction_loss(id, f, f) == 0.0);

  const Dictionary dict(oracle::random_matrix(4, 3, rng), 0.3);
  const Matrix g = oracle::random_matrix(6, 3, rng);
  const Matrix z = oracle::random_matrix(6, 4, rng);
  CHECK(reconstruction_loss(dict, g, z) == doctest::Approx(scalar_recon(dict.atoms(), 0.3, g, z)).epsilon(1e-12));
  CHECK_THROWS_AS(reconstruction_loss(dict, g, Matrix::Zero(6, 3)), ShapeError);
}

TEST_CASE("reconstruction gradient passes grad_check in z, M and F") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng = make_rng(seed, 5);
    const double lambda = 0.2;
    const Matrix params[] = {oracle::random_matrix(4, 3, rng), oracle::random_matrix(5, 4, rng),
                             oracle::random_matrix(5, 3, rng)};
    DifferentiableFn f = [&](std::span<const Matrix> p, Gradient* g) {
      const Dictionary dict(p[0], lambda);
      if (g) {
        ReconstructionGradient r = reconstruction_gradient(dict, p[2], p[1]);
        *g = {r.atoms, r.z, r.features};
      }
      return reconstruction_loss(dict, p[2], p[1]);
    };
    CHECK(grad_check(f, params, 1e-4) < 1e-4);
  }
}

TEST_CASE("coefficients_backward of zero upstream is zero") {
  Rng rng = make_rng(6, 0);
  const Dictionary dict(oracle::random_matrix(3, 5, rng), 0.1);
  const auto g = coefficients_backward(dict, oracle::random_matrix(4, 5, rng), Matrix::Zero(4, 3));
  CHECK(g.atoms.isZero());
  CHECK(g.features.isZero());
}

TEST_CASE("feature gradient is upstream S^-1 M") {
  Rng rng = make_rng(7, 0);
  const Dictionary dict(oracle::random_matrix(3, 5, rng), 0.4);
  const Matrix f = oracle::random_matrix(4, 5, rng);
  const Matrix up = oracle::random_matrix(4, 3, rng);
  const Matrix s = oracle::naive_matmul(dict.atoms(), dict.atoms().transpose()) + 0.4 * Matrix::Identity(3, 3);
  // S is symmetric so upstream S^-1 = (S^-1 upstream^T)^T.
  const Matrix want = oracle::naive_matmul(spd_solve(s, up.transpose()).transpose(), dict.atoms());
  CHECK(oracle::frob(coefficients_backward(dict, f, up).features - want) < 1e-12);
}

TEST_CASE("coefficients_backward passes grad_check in M and F") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng = make_rng(seed, 6);
    const double lambda = 0.05 + 0.1 * static_cast<double>(seed);
    const Matrix up = oracle::random_matrix(6, 4, rng);
    const Matrix params[] = {oracle::random_matrix(4, 5, rng), oracle::random_matrix(6, 5, rng)};
    DifferentiableFn f = [&](std::span<const Matrix> p, Gradient* g) {
      const Dictionary dict(p[0], lambda);
      const CoefficientSolver solver(dict);
      const Matrix z = solver.solve(p[1]);
      if (g) {
        const auto b = solver.backward(p[1], z, up);
        *g = {b.atoms, b.features};
      }
      return z.cwiseProduct(up).sum();
    };
    CHECK(grad_check(f, params, 1e-4) < 1e-4);
  }
}

TEST_CASE("drift_penalty examples") {
  Rng rng = make_rng(8, 0);
  const Matrix m = oracle::random_matrix(3, 4, rng);
  CHECK(drift_penalty(Dictionary(m, 0.1), Dictionary(m, 0.1)) == 0.0);
  Matrix shifted = m;
  shifted(1, 2) += 0.25;
  CHECK(drift_penalty(Dictionary(shifted, 0.1), Dictionary(m, 0.1)) == doctest::Approx(0.0625).epsilon(1e-12));
  const Matrix other = oracle::random_matrix(3, 4, rng);
  double want = 0.0;
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index j = 0; j < 4; ++j) want += (m(i, j) - other(i, j)) * (m(i, j) - other(i, j));
  CHECK(drift_penalty(Dictionary(m, 0.1), Dictionary(other, 0.1)) == doctest::Approx(want).epsilon(1e-12));
  CHECK_THROWS_AS(drift_penalty(Dictionary(m, 0.1), Dictionary(Matrix::Zero(2, 4), 0.1)), ShapeError);
}

TEST_CASE("random dictionary init scale") {
  Rng rng = make_rng(9, 0);
  const Dictionary dict = Dictionary::random(200, 64, 0.1, rng);
  const double var = dict.atoms().squaredNorm() / static_cast<double>(dict.atoms().size());
  CHECK(var == doctest::Approx(1.0 / 64).epsilon(0.05));
}

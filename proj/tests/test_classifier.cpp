#include <doctest.h>

#include <array>

#include "dfscil/classifier.hpp"
#include "dfscil/errors.hpp"
#include "oracles.hpp"

using namespace dfscil;

namespace {

Label scan_predict(const Matrix& z, Eigen::Index row, const Matrix& protos, const std::vector<Label>& labels) {
  Label best = 0;
  double best_c = -2.0;
  for (Eigen::Index k = 0; k < protos.rows(); ++k) {
    const double c = oracle::cosine(&z(row, 0), &protos(k, 0), z.cols());
    const Label l = labels[static_cast<std::size_t>(k)];
    if (c > best_c || (c == best_c && l < best)) {
      best = l;
      best_c = c;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("cosine examples") {
  const std::array<double, 3> v{0.3, -1.2, 2.0};
  const std::array<double, 3> neg{-0.3, 1.2, -2.0};
  CHECK(cosine(v, v) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(cosine(v, neg) == doctest::Approx(-1.0).epsilon(1e-15));
  const std::array<double, 2> e0{1, 0}, e1{0, 1};
  CHECK(cosine(e0, e1) == 0.0);
  const std::array<double, 2> tiny{1e-13, 0};
  CHECK_THROWS_AS(cosine(e0, tiny), NumericalError);
}

TEST_CASE("prototype set invariants") {
  CHECK_THROWS_AS(PrototypeSet(0, {1, 1}, Matrix::Identity(2, 2)), ConfigError);
  CHECK_THROWS_AS(PrototypeSet(0, {1, 2}, Matrix::Zero(2, 2)), NumericalError);
  CHECK_THROWS_AS(PrototypeSet(0, {1, 2, 3}, Matrix::Identity(2, 2)), ShapeError);
  PrototypeSet p(2, {5, 3}, Matrix::Identity(2, 2));
  CHECK(p.index_of(3) == 1u);
  CHECK_FALSE(p.index_of(4).has_value());
  p.mutable_vectors()(0, 1) = 0.5;
  p.freeze();
  CHECK_THROWS_AS(p.mutable_vectors(), StateError);
}

TEST_CASE("nll is zero with a single-prototype denominator") {
  const PrototypeSet p(0, {4}, Matrix::Ones(1, 3));
  Rng rng = make_rng(1, 0);
  const Matrix z = oracle::random_matrix(3, 3, rng);
  const std::vector<Label> y(3, 4);
  const PrototypeSet* den[] = {&p};
  CHECK(prototype_nll(z, y, p, den, {0.1}).loss == 0.0);
}

TEST_CASE("nll is log k when z is equidistant from all prototypes") {
  const PrototypeSet p(0, {0, 1, 2, 3}, Matrix::Identity(4, 4));
  const Matrix z = Matrix::Ones(2, 4);
  const std::vector<Label> y{0, 3};
  const PrototypeSet* den[] = {&p};
  CHECK(prototype_nll(z, y, p, den, {0.1}).loss == doctest::Approx(std::log(4.0)).epsilon(1e-14));
}

TEST_CASE("nll matches the direct summation oracle") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng = make_rng(seed, 1);
    const PrototypeSet p(0, {2, 7, 9}, oracle::random_matrix(3, 5, rng));
    const Matrix z = oracle::random_matrix(8, 5, rng);
    std::vector<Label> y;
    for (int i = 0; i < 8; ++i) y.push_back(p.labels()[static_cast<std::size_t>(i % 3)]);
    const PrototypeSet* den[] = {&p};
    const double got = prototype_nll(z, y, p, den, {0.5}).loss;
    CHECK(got == doctest::Approx(oracle::prototype_nll(z, y, p.vectors(), p.labels(), 0.5)).epsilon(1e-10));
  }
}

TEST_CASE("nll over a union denominator matches the oracle") {
  Rng rng = make_rng(11, 1);
  const PrototypeSet a(0, {0, 1}, oracle::random_matrix(2, 4, rng));
  const PrototypeSet b(1, {5, 6, 7}, oracle::random_matrix(3, 4, rng));
  const Matrix z = oracle::random_matrix(4, 4, rng);
  const std::vector<Label> y{5, 7, 6, 5};
  const PrototypeSet* den[] = {&a, &b};
  Matrix all(5, 4);
  all << a.vectors(), b.vectors();
  const double want = oracle::prototype_nll(z, y, all, {0, 1, 5, 6, 7}, 0.2);
  CHECK(prototype_nll(z, y, b, den, {0.2}).loss == doctest::Approx(want).epsilon(1e-10));
}

TEST_CASE("nll error paths") {
  const PrototypeSet p(0, {0, 1}, Matrix::Identity(2, 2));
  const PrototypeSet* den[] = {&p};
  const std::vector<Label> y{3};
  CHECK_THROWS_AS(prototype_nll(Matrix::Ones(1, 2), y, p, den, {0.1}), LookupError);
  CHECK_THROWS_AS(ClassifierConfig{0.0}.validate(), ConfigError);
  CHECK_THROWS_AS(ClassifierConfig{-1.0}.validate(), ConfigError);
}

TEST_CASE("nll is invariant to row rescaling") {
  Rng rng = make_rng(12, 1);
  const PrototypeSet p(0, {0, 1, 2}, oracle::random_matrix(3, 6, rng));
  const Matrix z = oracle::random_matrix(5, 6, rng);
  const std::vector<Label> y{0, 1, 2, 0, 1};
  const PrototypeSet* den[] = {&p};
  const double a = prototype_nll(z, y, p, den, {0.1}).loss;
  CHECK(std::abs(prototype_nll(3.0 * z, y, p, den, {0.1}).loss - a) < 1e-10);
}

TEST_CASE("nll is finite at small tau and extreme cosines") {
  Matrix protos(2, 2);
  protos << 1, 0, -1, 0;
  const PrototypeSet p(0, {0, 1}, protos);
  Matrix z(2, 2);
  z << 1, 0, 1, 0;
  const std::vector<Label> y{0, 1};
  const PrototypeSet* den[] = {&p};
  const NllResult r = prototype_nll(z, y, p, den, {0.01});
  CHECK(std::isfinite(r.loss));
  CHECK(r.loss == doctest::Approx(100.0).epsilon(1e-9));
  CHECK(all_finite(r.grad_z));
  CHECK(all_finite(r.grad_targets));
}

TEST_CASE("nll gradients pass grad_check") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng = make_rng(seed, 2);
    const Matrix params[] = {oracle::random_matrix(6, 4, rng), oracle::random_matrix(3, 4, rng),
                             oracle::random_matrix(2, 4, rng)};
    const std::vector<Label> y{10, 11, 12, 10, 11, 12};
    DifferentiableFn f = [&](std::span<const Matrix> p, Gradient* g) {
      const PrototypeSet target(1, {10, 11, 12}, p[1]);
      const PrototypeSet extra(0, {20, 21}, p[2]);
      // Targets are also the first denominator block: gradients add.
      const PrototypeSet* den[] = {&target, &extra};
      const NllResult r = prototype_nll(p[0], y, target, den, {0.3}, g != nullptr);
      if (g) *g = {r.grad_z, r.grad_targets + r.grad_denominator[0], r.grad_denominator[1]};
      return r.loss;
    };
    CHECK(grad_check(f, params, 1e-4) < 1e-4);
  }
}

TEST_CASE("prototypes from means") {
  Matrix z(3, 2);
  z << 1, 2, 3, 4, -1, 0;
  const std::vector<Label> y{7, 2, 7};
  const PrototypeSet p = init_prototypes_from_means(z, y, 1);
  CHECK(p.labels() == std::vector<Label>{2, 7});
  CHECK(p.vectors()(0, 0) == 3.0);
  CHECK(p.vectors()(1, 0) == 0.0);
  CHECK(p.vectors()(1, 1) == 1.0);
  CHECK(p.session() == 1);

  Rng rng = make_rng(3, 2);
  const Matrix v = oracle::random_matrix(1, 4, rng);
  const Matrix u = oracle::random_matrix(1, 4, rng);
  Matrix pair(2, 4);
  pair << v, -v + 2.0 * u;
  const std::vector<Label> same{0, 0};
  CHECK(oracle::frob(init_prototypes_from_means(pair, same, 1).vectors() - u) < 1e-15);

  const std::vector<Label> classes{2, 7, 9};
  CHECK_THROWS_AS(init_prototypes_from_means(z, y, 1, classes), ConfigError);
  Matrix zero_mean(2, 2);
  zero_mean << 1, 1, -1, -1;
  CHECK_THROWS_AS(init_prototypes_from_means(zero_mean, same, 1), NumericalError);
}

TEST_CASE("five-shot means match a per-class loop") {
  Rng rng = make_rng(4, 2);
  const Matrix z = oracle::random_matrix(15, 6, rng);
  std::vector<Label> y;
  for (int i = 0; i < 15; ++i) y.push_back(i % 3);
  const PrototypeSet p = init_prototypes_from_means(z, y, 1);
  for (int c = 0; c < 3; ++c)
    for (Eigen::Index j = 0; j < 6; ++j) {
      double s = 0;
      for (int i = c; i < 15; i += 3) s += z(i, j);
      CHECK(p.vectors()(c, j) == doctest::Approx(s / 5.0).epsilon(1e-14));
    }
}

TEST_CASE("predict examples") {
  const PrototypeSet p(0, {4, 1, 9}, Matrix::Identity(3, 3));
  const PrototypeSet* sets[] = {&p};
  const std::array<double, 3> e2{0, 0, 1};
  CHECK(predict(e2, sets) == 9);
  const std::array<double, 3> tie{1, 1, 0};
  CHECK(predict(tie, sets) == 1);
  std::span<const PrototypeSet* const> none;
  CHECK_THROWS_AS(predict(e2, none), StateError);
}

TEST_CASE("predict agrees with an exhaustive scan and ignores scale") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng = make_rng(seed, 3);
    const Matrix protos = oracle::random_matrix(10, 5, rng);
    std::vector<Label> labels{3, 8, 1, 0, 6, 12, 4, 5, 9, 2};
    const PrototypeSet a(0, {3, 8, 1, 0, 6}, protos.topRows(5));
    const PrototypeSet b(1, {12, 4, 5, 9, 2}, protos.bottomRows(5));
    const PrototypeSet* sets[] = {&a, &b};
    const Matrix z = oracle::random_matrix(1, 5, rng);
    const Label got = predict(row_span(z, 0), sets);
    CHECK(got == scan_predict(z, 0, protos, labels));
    const Matrix scaled = 7.5 * z;
    CHECK(predict(row_span(scaled, 0), sets) == got);
  }
}

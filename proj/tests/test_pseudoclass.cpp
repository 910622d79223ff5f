#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "dfscil/errors.hpp"
#include "dfscil/pseudoclass.hpp"
#include "oracles.hpp"

using namespace dfscil;

namespace {

std::vector<Label> iota_labels(int n) {
  std::vector<Label> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), 0);
  return v;
}

// Recovers gamma from f = g a + (1 - g) b by least squares over all coordinates.
double recover_gamma(const double* f, const double* a, const double* b, Eigen::Index d) {
  double num = 0, den = 0;
  for (Eigen::Index j = 0; j < d; ++j) {
    num += (f[j] - b[j]) * (a[j] - b[j]);
    den += (a[j] - b[j]) * (a[j] - b[j]);
  }
  return num / den;
}

}  // namespace

TEST_CASE("two base classes give the single pair") {
  Rng rng = make_rng(1, 0);
  const std::vector<Label> base{0, 1};
  const PseudoClassPlan plan = make_plan(base, 1, 2, rng);
  REQUIRE(plan.pairs.size() == 1);
  CHECK(std::min(plan.pairs[0].first, plan.pairs[0].second) == 0);
  CHECK(std::max(plan.pairs[0].first, plan.pairs[0].second) == 1);
  CHECK(plan.pairs[0].pseudo == 2);
}

TEST_CASE("sixty base classes, forty distinct pairs, labels above the base range") {
  Rng rng = make_rng(2, 0);
  const std::vector<Label> base = iota_labels(60);
  const PseudoClassPlan plan = make_plan(base, 40, 60, rng);
  REQUIRE(plan.pairs.size() == 40);
  std::set<std::pair<Label, Label>> seen;
  std::set<Label> pseudo;
  for (const ClassPair& p : plan.pairs) {
    CHECK(p.first != p.second);
    seen.insert({std::min(p.first, p.second), std::max(p.first, p.second)});
    pseudo.insert(p.pseudo);
    CHECK(p.pseudo >= 60);
  }
  CHECK(seen.size() == 40);
  CHECK(pseudo.size() == 40);
}

TEST_CASE("pairs repeat only past the number of distinct pairs") {
  Rng rng = make_rng(3, 0);
  const std::vector<Label> base{0, 1, 2};
  const PseudoClassPlan plan = make_plan(base, 5, 3, rng);
  std::set<std::pair<Label, Label>> first3;
  for (std::size_t i = 0; i < 3; ++i)
    first3.insert({std::min(plan.pairs[i].first, plan.pairs[i].second),
                   std::max(plan.pairs[i].first, plan.pairs[i].second)});
  CHECK(first3.size() == 3);
  CHECK(plan.pseudo_labels() == std::vector<Label>{3, 4, 5, 6, 7});
}

TEST_CASE("make_plan is deterministic and validates input") {
  const std::vector<Label> base = iota_labels(10);
  Rng a = make_rng(4, 0), b = make_rng(4, 0);
  CHECK(make_plan(base, 7, 10, a) == make_plan(base, 7, 10, b));
  const std::vector<Label> one{0};
  CHECK_THROWS_AS(make_plan(one, 1, 1, a), ConfigError);
  CHECK_THROWS_AS(make_plan(base, 0, 10, a), ConfigError);
  CHECK_THROWS_AS(make_plan(base, 3, 9, a), ConfigError);
}

TEST_CASE("degenerate gamma range gives exact midpoints") {
  Rng rng = make_rng(5, 0);
  const Matrix f = oracle::random_matrix(6, 4, rng);
  const std::vector<Label> y{0, 0, 0, 1, 1, 1};
  PseudoClassPlan plan{{{0, 1, 2}}, 0.5, 0.5, 4};
  const SyntheticBatch s = mixup_batch(plan, f, y, rng);
  REQUIRE(s.features.rows() == 4);
  for (Eigen::Index i = 0; i < s.features.rows(); ++i) {
    const auto [r1, r2] = s.sources[static_cast<std::size_t>(i)];
    CHECK(y[static_cast<std::size_t>(r1)] == 0);
    CHECK(y[static_cast<std::size_t>(r2)] == 1);
    const Matrix mid = 0.5 * f.row(r1) + 0.5 * f.row(r2);
    CHECK(s.features.row(i) == mid);
    CHECK(s.labels[static_cast<std::size_t>(i)] == 2);
  }
}

TEST_CASE("identical endpoints give the endpoint") {
  Rng rng = make_rng(6, 0);
  Matrix f(2, 3);
  f << 0.5, -1.0, 2.0, 0.5, -1.0, 2.0;
  const std::vector<Label> y{3, 8};
  PseudoClassPlan plan{{{3, 8, 9}}, 0.4, 0.6, 3};
  const SyntheticBatch s = mixup_batch(plan, f, y, rng);
  for (Eigen::Index i = 0; i < s.features.rows(); ++i)
    for (Eigen::Index j = 0; j < 3; ++j) CHECK(s.features(i, j) == doctest::Approx(f(0, j)).epsilon(1e-15));
}

TEST_CASE("synthetic rows lie on their source segment") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng = make_rng(seed, 7);
    const Matrix f = oracle::random_matrix(40, 5, rng);
    std::vector<Label> y;
    for (int i = 0; i < 40; ++i) y.push_back(i % 5);
    const std::vector<Label> base = iota_labels(5);
    PseudoClassPlan plan = make_plan(base, 6, 5, rng);
    plan.per_class = 3;
    const SyntheticBatch s = mixup_batch(plan, f, y, rng);
    CHECK(s.features.rows() == 18);
    for (Eigen::Index i = 0; i < s.features.rows(); ++i) {
      const auto [r1, r2] = s.sources[static_cast<std::size_t>(i)];
      CHECK(y[static_cast<std::size_t>(r1)] != y[static_cast<std::size_t>(r2)]);
      const double g = recover_gamma(&s.features(i, 0), &f(r1, 0), &f(r2, 0), 5);
      CHECK(g >= 0.4 - 1e-12);
      CHECK(g <= 0.6 + 1e-12);
      CHECK(g == doctest::Approx(s.gammas[static_cast<std::size_t>(i)]).epsilon(1e-9));
      for (Eigen::Index j = 0; j < 5; ++j) {
        CHECK(s.features(i, j) >= std::min(f(r1, j), f(r2, j)) - 1e-15);
        CHECK(s.features(i, j) <= std::max(f(r1, j), f(r2, j)) + 1e-15);
      }
    }
  }
}

TEST_CASE("pairs missing from the batch are skipped") {
  Rng rng = make_rng(8, 0);
  const Matrix f = oracle::random_matrix(4, 2, rng);
  const std::vector<Label> y{0, 0, 1, 1};
  PseudoClassPlan plan{{{0, 1, 5}, {0, 2, 6}}, 0.4, 0.6, 2};
  const SyntheticBatch s = mixup_batch(plan, f, y, rng);
  CHECK(s.labels == std::vector<Label>{5, 5});
}

TEST_CASE("mixup is bitwise reproducible and rejects empty batches") {
  const Matrix f = Matrix::Random(20, 3);
  std::vector<Label> y;
  for (int i = 0; i < 20; ++i) y.push_back(i % 4);
  PseudoClassPlan plan{{{0, 1, 4}, {2, 3, 5}}, 0.4, 0.6, 5};
  Rng a = make_rng(9, 0), b = make_rng(9, 0);
  CHECK(mixup_batch(plan, f, y, a).features == mixup_batch(plan, f, y, b).features);
  const std::vector<Label> none;
  CHECK_THROWS_AS(mixup_batch(plan, Matrix(0, 3), none, a), ConfigError);
}

TEST_CASE("plan validation") {
  CHECK_THROWS_AS((PseudoClassPlan{{{1, 1, 2}}, 0.4, 0.6, 1}.validate()), ConfigError);
  CHECK_THROWS_AS((PseudoClassPlan{{{0, 1, 2}, {1, 2, 2}}, 0.4, 0.6, 1}.validate()), ConfigError);
  CHECK_THROWS_AS((PseudoClassPlan{{{0, 1, 2}}, 0.7, 0.6, 1}.validate()), ConfigError);
  CHECK_THROWS_AS((PseudoClassPlan{{{0, 1, 2}}, 0.4, 0.6, 0}.validate()), ConfigError);
}

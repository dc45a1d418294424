#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "doctest.h"
#include "fixtures.hpp"
#include "kgood/risk.hpp"

using namespace kgood;

TEST_SUITE("risk") {

TEST_CASE("pair_hinge examples") {
  KSpacePair pair{{0.3, -2.0}, -1.0};
  CHECK(pair_hinge(std::vector<double>{0.0, 0.0}, pair) == 1.0);
  KSpacePair tight{{0.5, 0.0}, 1.0};
  CHECK(pair_hinge(std::vector<double>{2.0, 0.0}, tight) == 0.0);

  const auto ks = fixture::f1_kernels();
  const std::vector<double> x1{1.0}, x3{0.5};
  const auto p13 = kspace_map(ks, x1, 1, x3, 1);
  CHECK(pair_hinge(std::vector<double>{1.0, 0.0}, p13) == 0.5);
  CHECK_THROWS_AS(pair_hinge(std::vector<double>{1.0}, p13), std::invalid_argument);
}

TEST_CASE("empirical_risk on F1") {
  const auto f1 = fixture::f1_data();
  const auto ks = fixture::f1_kernels();
  CHECK(empirical_risk(std::vector<double>{0.0, 0.0}, f1, ks) == 1.0);
  CHECK(std::abs(empirical_risk(std::vector<double>{1.0, 0.0}, f1, ks) - 1.0 / 3.0) <= 1e-12);
  CHECK(empirical_risk(std::vector<double>{2.0, 0.0}, f1, ks) == 0.0);
  CHECK_THROWS_AS(empirical_risk(std::vector<double>{1.0, 0.0}, f1.slice(0, 1), ks), std::invalid_argument);
}

TEST_CASE("empirical_risk matches the brute-force oracle") {
  Rng rng(derive_seed(11, 1));
  for (int c = 0; c < 50; ++c) {
    auto rp = fixture::random_problem(rng, 2 + uniform_index(rng, 25), 1 + uniform_index(rng, 4), 2);
    const auto mu = fixture::random_nonneg(rng, rp.kernels.size(), 3.0);
    CHECK(empirical_risk(mu, rp.data, rp.kernels) == doctest::Approx(oracle::unordered_risk(rp.oracle, mu)).epsilon(1e-12));
  }
}

TEST_CASE("diagonal variant on F1") {
  const auto f1 = fixture::f1_data();
  const auto ks = fixture::f1_kernels();
  const std::vector<double> mu1{1.0, 0.0}, mu2{2.0, 0.0}, zero{0.0, 0.0};
  CHECK(std::abs(diagonal_risk(mu1, f1, ks) - 0.125) <= 1e-12);
  CHECK(std::abs(empirical_risk_with_diagonal(mu1, f1, ks) - (1.0 / 3.0 + 0.125)) <= 1e-12);
  CHECK(std::abs(empirical_risk_with_diagonal(mu2, f1, ks) - 1.0 / 12.0) <= 1e-12);
  CHECK(std::abs(empirical_risk_with_diagonal(zero, f1, ks) - (1.0 + 2.0 / 4.0)) <= 1e-12);
  // plain average: (0 + 0 + 0.75) / 3
  CHECK(std::abs(diagonal_risk(mu1, f1, ks, DiagonalWeight::plain_average) - 0.25) <= 1e-12);
}

TEST_CASE("diagonal variant with mu = 0 on random sizes") {
  Rng rng(derive_seed(11, 2));
  for (int c = 0; c < 10; ++c) {
    const std::size_t n = 2 + uniform_index(rng, 40);
    auto rp = fixture::random_problem(rng, n, 2, 1);
    const double expected = 1.0 + 2.0 / (static_cast<double>(n) + 1.0);
    CHECK(empirical_risk_with_diagonal(std::vector<double>{0.0, 0.0}, rp.data, rp.kernels) ==
          doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("empirical_risk of zero is exactly one") {
  Rng rng(derive_seed(11, 3));
  for (int c = 0; c < 20; ++c) {
    auto rp = fixture::random_problem(rng, 2 + uniform_index(rng, 60), 3, 2);
    CHECK(empirical_risk(std::vector<double>(3, 0.0), rp.data, rp.kernels) == 1.0);
  }
}

TEST_CASE("permutation invariance") {
  Rng rng(derive_seed(11, 4));
  for (int c = 0; c < 30; ++c) {
    const std::size_t n = 3 + uniform_index(rng, 40);
    auto rp = fixture::random_problem(rng, n, 3, 2);
    const auto mu = fixture::random_nonneg(rng, 3, 4.0);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    LabeledDataset shuffled(rp.data.dim());
    for (std::size_t i : perm) shuffled.push_back(rp.data.point(i), rp.data.label(i));
    CHECK(empirical_risk(mu, rp.data, rp.kernels) == empirical_risk(mu, shuffled, rp.kernels));
  }
}

TEST_CASE("convexity in mu") {
  Rng rng(derive_seed(11, 5));
  auto rp = fixture::random_problem(rng, 25, 4, 2);
  for (int t = 0; t < 1000; ++t) {
    const auto a = fixture::random_nonneg(rng, 4, 5.0);
    const auto b = fixture::random_nonneg(rng, 4, 5.0);
    const double s = uniform01(rng);
    std::vector<double> mid(4);
    for (std::size_t i = 0; i < 4; ++i) mid[i] = s * a[i] + (1.0 - s) * b[i];
    const double lhs = empirical_risk(mid, rp.data, rp.kernels);
    const double rhs = s * empirical_risk(a, rp.data, rp.kernels) + (1.0 - s) * empirical_risk(b, rp.data, rp.kernels);
    CHECK(lhs <= rhs + 1e-12);
  }
}

TEST_CASE("subsampled pair sets") {
  Rng rng(derive_seed(11, 6));
  auto rp = fixture::random_problem(rng, 120, 2, 2);
  const std::vector<double> mu{1.5, 0.5};
  const PairSet full = PairSet::enumerate(rp.data, rp.kernels);
  CHECK_FALSE(full.subsampled());
  CHECK(full.size() == 120 * 119 / 2);
  const PairSet sub = PairSet::enumerate(rp.data, rp.kernels, {2000, 99});
  CHECK(sub.subsampled());
  CHECK(sub.size() == 2000);
  CHECK(sub.population() == full.size());
  CHECK(std::abs(sub.mean_hinge(mu) - full.mean_hinge(mu)) < 0.05);
  const PairSet again = PairSet::enumerate(rp.data, rp.kernels, {2000, 99});
  CHECK(again.rows() == sub.rows());
}

TEST_CASE("pair_from_index enumerates row by row") {
  const std::size_t n = 7;
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++k) {
      const auto [a, b] = pair_from_index(k, n);
      CHECK(a == i);
      CHECK(b == j);
    }
  }
}

TEST_CASE("true_risk_mc exact enumeration on F1") {
  const auto ks = fixture::f1_kernels();
  auto src = std::make_shared<EmpiricalSource>(fixture::f1_data());
  const PairSampler sampler{src, 5};
  const auto r2 = true_risk_mc(std::vector<double>{2.0, 0.0}, sampler, ks, 1, RiskMode::exact_enumeration);
  CHECK(std::abs(r2.value - 1.0 / 18.0) <= 1e-12);
  CHECK(r2.num_samples == 9);
  const auto r1 = true_risk_mc(std::vector<double>{1.0, 0.0}, sampler, ks, 1, RiskMode::exact_enumeration);
  CHECK(std::abs(r1.value - 2.75 / 9.0) <= 1e-12);
  CHECK(std::abs(ordered_pair_risk(std::vector<double>{2.0, 0.0}, fixture::f1_data(), ks) - 1.0 / 18.0) <= 1e-12);
}

TEST_CASE("exact enumeration equals the ordered-pair oracle") {
  Rng rng(derive_seed(11, 7));
  for (int c = 0; c < 20; ++c) {
    auto rp = fixture::random_problem(rng, 1 + uniform_index(rng, 15), 3, 2);
    const auto mu = fixture::random_nonneg(rng, 3, 3.0);
    auto src = std::make_shared<EmpiricalSource>(rp.data);
    const auto r = true_risk_mc(mu, {src, 1}, rp.kernels, 1, RiskMode::exact_enumeration);
    CHECK(r.value == doctest::Approx(oracle::ordered_risk(rp.oracle, mu)).epsilon(1e-12));
  }
}

TEST_CASE("true_risk_mc Monte Carlo") {
  const auto ks = fixture::f1_kernels();
  auto src = std::make_shared<EmpiricalSource>(fixture::f1_data());
  const auto zero = true_risk_mc(std::vector<double>{0.0, 0.0}, {src, 3}, ks, 5000);
  CHECK(zero.value == 1.0);
  CHECK(zero.std_error == 0.0);
  CHECK(zero.num_samples == 5000);

  const auto a = true_risk_mc(std::vector<double>{1.0, 0.0}, {src, 3}, ks, 5000);
  const auto b = true_risk_mc(std::vector<double>{1.0, 0.0}, {src, 3}, ks, 5000);
  CHECK(a.value == b.value);
  CHECK_THROWS_AS(true_risk_mc(std::vector<double>{1.0, 0.0}, {src, 3}, ks, 0), std::invalid_argument);
}

TEST_CASE("two seeds agree within four combined stderr") {
  Rng rng(derive_seed(11, 8));
  for (int c = 0; c < 10; ++c) {
    auto rp = fixture::random_problem(rng, 30, 3, 2);
    const auto mu = fixture::random_nonneg(rng, 3, 3.0);
    auto src = std::make_shared<EmpiricalSource>(rp.data);
    const auto a = true_risk_mc(mu, {src, derive_seed(c, 1)}, rp.kernels, 20000);
    const auto b = true_risk_mc(mu, {src, derive_seed(c, 2)}, rp.kernels, 20000);
    const double combined = std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
    CHECK(std::abs(a.value - b.value) <= 4.0 * combined);
    const double exact = oracle::ordered_risk(rp.oracle, mu);
    CHECK(std::abs(a.value - exact) <= 4.0 * a.std_error + 1e-12);
  }
}

TEST_CASE("is_combination_good") {
  CHECK(is_combination_good(0.0, 0.0));
  CHECK(is_combination_good(1.0 / 18.0, 0.1));
  CHECK_FALSE(is_combination_good(1.0 / 3.0, 0.1));
}

}

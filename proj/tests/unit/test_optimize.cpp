#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "kgood/optimize.hpp"

using namespace kgood;

namespace {

double l2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double l1(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

// (1/3) sum of y y' z over the three F1 pairs.
std::vector<double> f1_mean_signed_z() {
  const double e4 = std::exp(-4.0), e025 = std::exp(-0.25), e225 = std::exp(-2.25);
  return {(1.0 + 0.5 + 0.5) / 3.0, (-e4 + e025 - e225) / 3.0};
}

}  // namespace

TEST_SUITE("optimize") {

TEST_CASE("objective examples") {
  const auto f1 = fixture::f1_data();
  const auto ks = fixture::f1_kernels();
  CHECK(objective_l2(std::vector<double>{0.0, 0.0}, f1, ks, 3.0) == 1.0);
  CHECK(std::abs(objective_l2(std::vector<double>{1.0, 0.0}, f1, ks, 1.0) - 5.0 / 6.0) <= 1e-12);
  CHECK(std::abs(objective_l2(std::vector<double>{2.0, 0.0}, f1, ks, 0.1) - 0.2) <= 1e-12);
  CHECK(objective_l1(std::vector<double>{0.0, 0.0}, f1, ks, 3.0) == 1.0);
  CHECK(std::abs(objective_l1(std::vector<double>{1.0, 0.0}, f1, ks, 1.0) - 5.0 / 6.0) <= 1e-12);
  CHECK(std::abs(objective_l1(std::vector<double>{2.0, 0.0}, f1, ks, 1.0) - 1.0) <= 1e-12);
  CHECK_THROWS_AS(objective_l2(std::vector<double>{1.0}, f1, ks, 1.0), std::invalid_argument);
}

TEST_CASE("subgradient examples") {
  const auto f1 = fixture::f1_data();
  const auto ks = fixture::f1_kernels();
  const PairSet pairs = PairSet::enumerate(f1, ks);
  const auto g0 = subgradient_risk(std::vector<double>{0.0, 0.0}, pairs);
  const auto expected = f1_mean_signed_z();
  CHECK(std::abs(g0[0] + expected[0]) <= 1e-15);
  CHECK(std::abs(g0[1] + expected[1]) <= 1e-15);
  CHECK(std::abs(g0[1] + 0.21836) < 1e-5);

  const auto flat = subgradient_risk(std::vector<double>{100.0, 0.0}, pairs);
  CHECK(flat[0] == 0.0);
  CHECK(flat[1] == 0.0);

  const std::vector<KSpacePair> kink{{{0.5, 0.25}, 1.0}};
  const auto gk = subgradient_risk(std::vector<double>{2.0, 0.0}, kink);
  CHECK(gk[0] == 0.0);
  CHECK(gk[1] == 0.0);
}

TEST_CASE("project_nonneg examples") {
  CHECK(project_nonneg(std::vector<double>{1.0, -1.0}) == std::vector<double>{1.0, 0.0});
  CHECK(project_nonneg(std::vector<double>{0.0, 0.0}) == std::vector<double>{0.0, 0.0});
  const auto r = project_nonneg(std::vector<double>{-0.3, 2.5, -0.0});
  CHECK(r == std::vector<double>{0.0, 2.5, 0.0});
  CHECK_FALSE(std::signbit(r[2]));
}

TEST_CASE("project_feasible lands in the certificate set") {
  Rng rng(derive_seed(13, 1));
  for (int t = 0; t < 500; ++t) {
    std::vector<double> v(1 + uniform_index(rng, 6));
    for (double& x : v) x = uniform(rng, -3.0, 3.0);
    const double r = uniform(rng, 0.1, 2.0);
    const auto a = project_feasible(v, Regularizer::l2, r);
    const auto b = project_feasible(v, Regularizer::l1, r);
    for (double x : a) CHECK(x >= 0.0);
    for (double x : b) CHECK(x >= 0.0);
    CHECK(l2(a) <= r * (1.0 + 1e-12));
    CHECK(l1(b) <= r * (1.0 + 1e-12));
    // projections are nonexpansive towards any feasible point, e.g. the origin
    const std::vector<double> zero(v.size(), 0.0);
    std::vector<double> da(v.size()), dz(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      da[i] = v[i] - a[i];
      dz[i] = v[i];
    }
    CHECK(l2(da) <= l2(dz) + 1e-12);
  }
}

TEST_CASE("solve_l2 on F1 with lambda = 10") {
  const auto f1 = fixture::f1_data();
  const auto ks = fixture::f1_kernels();
  SolverConfig cfg;
  cfg.lambda = 10.0;
  const auto res = solve_l2(f1, ks, cfg);
  const auto target = f1_mean_signed_z();
  CHECK(std::abs(res.mu_hat[0] - target[0] / 10.0) <= 1e-6);
  CHECK(std::abs(res.mu_hat[1] - target[1] / 10.0) <= 1e-6);
  CHECK(std::abs(res.mu_hat[0] - 0.0667) < 1e-4);
  CHECK(std::abs(res.mu_hat[1] - 0.0218) < 1e-4);

  const auto pr = fixture::f1_oracle();
  const auto grid = oracle::grid_search_2d(
      [&](const std::vector<double>& mu) { return oracle::objective(pr, mu, 10.0, false); }, 0.0, 0.2, 1e-4);
  CHECK(std::abs(grid.argmin[0] - res.mu_hat[0]) <= 1e-4);
  CHECK(std::abs(grid.argmin[1] - res.mu_hat[1]) <= 1e-4);
  CHECK(res.objective <= grid.value + cfg.epsilon_opt);
}

TEST_CASE("huge lambda drives both solvers to zero") {
  const auto f1 = fixture::f1_data();
  const auto ks = fixture::f1_kernels();
  SolverConfig cfg;
  cfg.lambda = 1e6;
  for (const auto& res : {solve_l2(f1, ks, cfg), solve_l1(f1, ks, cfg)}) {
    for (double v : res.mu_hat) CHECK(std::abs(v) <= 1e-5);
  }
}

TEST_CASE("solve_l1 on F1 with lambda = 0.5") {
  const auto f1 = fixture::f1_data();
  const auto ks = fixture::f1_kernels();
  SolverConfig cfg;
  cfg.lambda = 0.5;
  const auto res = solve_l1(f1, ks, cfg);
  CHECK(res.objective <= 0.5 + cfg.epsilon_opt);
  CHECK(l1(res.mu_hat) <= 2.0 / 0.5 + 1e-9);
  CHECK(res.radius_certificate == 4.0);
}

TEST_CASE("feasibility, certificates and near-optimality on random problems") {
  Rng rng(derive_seed(13, 2));
  for (int c = 0; c < 12; ++c) {
    auto rp = fixture::random_problem(rng, 5 + uniform_index(rng, 20), 1 + uniform_index(rng, 4), 2);
    const double lambda = std::exp(uniform(rng, std::log(0.01), std::log(5.0)));
    for (Regularizer reg : {Regularizer::l2, Regularizer::l1}) {
      SolverConfig cfg;
      cfg.lambda = lambda;
      cfg.reg = reg;
      const auto res = solve(rp.data, rp.kernels, cfg);
      for (double v : res.mu_hat) CHECK(v >= 0.0);
      const bool is_l1 = reg == Regularizer::l1;
      if (is_l1) {
        CHECK(l1(res.mu_hat) <= 2.0 / lambda + 1e-9);
      } else {
        CHECK(l2(res.mu_hat) <= std::sqrt(2.0 / lambda) + 1e-9);
      }
      const double mine = oracle::objective(rp.oracle, res.mu_hat, lambda, is_l1);
      CHECK(mine == doctest::Approx(res.objective).epsilon(1e-12));
      CHECK(mine <= 1.0 + cfg.epsilon_opt);
      const double radius = is_l1 ? 2.0 / lambda : std::sqrt(2.0 / lambda);
      for (int probe = 0; probe < 100; ++probe) {
        std::vector<double> mu(rp.kernels.size());
        for (double& v : mu) v = uniform01(rng);
        const double norm = is_l1 ? l1(mu) : l2(mu);
        const double scale = radius * uniform01(rng) / norm;
        for (double& v : mu) v *= scale;
        CHECK(mine <= oracle::objective(rp.oracle, mu, lambda, is_l1) + cfg.epsilon_opt);
      }
    }
  }
}

TEST_CASE("weak duality") {
  Rng rng(derive_seed(13, 3));
  auto rp = fixture::random_problem(rng, 15, 3, 2);
  const PairSet pairs = PairSet::enumerate(rp.data, rp.kernels);
  for (Regularizer reg : {Regularizer::l2, Regularizer::l1}) {
    SolverConfig cfg;
    cfg.lambda = 0.3;
    cfg.reg = reg;
    const auto res = solve(pairs, cfg);
    for (int t = 0; t < 200; ++t) {
      std::vector<double> alpha(pairs.size());
      for (double& a : alpha) a = uniform01(rng);
      CHECK(dual_value(pairs, alpha, 0.3, reg) <= res.objective + 1e-12);
    }
    CHECK(res.gap_estimate >= 0.0);
    CHECK(res.converged);
  }
}

TEST_CASE("determinism") {
  Rng rng(derive_seed(13, 4));
  auto rp = fixture::random_problem(rng, 40, 4, 3);
  for (Regularizer reg : {Regularizer::l2, Regularizer::l1}) {
    SolverConfig cfg;
    cfg.lambda = 0.2;
    cfg.reg = reg;
    cfg.seed = 77;
    const auto a = solve(rp.data, rp.kernels, cfg);
    const auto b = solve(rp.data, rp.kernels, cfg);
    CHECK(a.mu_hat == b.mu_hat);
    CHECK(a.iterations == b.iterations);
  }
}

TEST_CASE("stochastic minibatch path keeps the certificate and is deterministic") {
  Rng rng(derive_seed(13, 5));
  auto rp = fixture::random_problem(rng, 80, 3, 2);
  SolverConfig cfg;
  cfg.lambda = 0.5;
  cfg.minibatch_pairs = 16;
  cfg.max_iters = 3000;
  const auto a = solve(rp.data, rp.kernels, cfg);
  const auto b = solve(rp.data, rp.kernels, cfg);
  CHECK(a.stochastic);
  CHECK(a.mu_hat == b.mu_hat);
  CHECK(l2(a.mu_hat) <= std::sqrt(2.0 / 0.5) + 1e-9);
  cfg.minibatch_pairs = 4096;
  const auto full = solve(rp.data, rp.kernels, cfg);
  CHECK_FALSE(full.stochastic);
  CHECK(a.objective <= full.objective + 0.05);
}

TEST_CASE("optimal objective is nondecreasing in lambda") {
  Rng rng(derive_seed(13, 6));
  for (int c = 0; c < 10; ++c) {
    auto rp = fixture::random_problem(rng, 12 + uniform_index(rng, 10), 1 + uniform_index(rng, 3), 2);
    for (Regularizer reg : {Regularizer::l2, Regularizer::l1}) {
      double prev = -1.0;
      for (int k = 0; k < 20; ++k) {
        SolverConfig cfg;
        cfg.reg = reg;
        cfg.lambda = std::pow(10.0, -2.0 + 3.0 * k / 19.0);
        const auto res = solve(rp.data, rp.kernels, cfg);
        CHECK(res.objective >= prev - 2.0 * cfg.epsilon_opt);
        prev = res.objective;
      }
    }
  }
}

TEST_CASE("degenerate inputs") {
  const auto f1 = fixture::f1_data();
  const auto ks = fixture::f1_kernels();
  SolverConfig cfg;
  cfg.lambda = 0.0;
  CHECK_THROWS_AS(solve(f1, ks, cfg), std::invalid_argument);
  cfg.lambda = 1.0;
  const LabeledDataset same(1, {0.2, 0.9, -0.4}, {1, 1, 1});
  const auto res = solve(same, ks, cfg);
  for (double v : res.mu_hat) CHECK(v >= 0.0);
  CHECK(res.converged);
  CHECK(radius_certificate(Regularizer::l2, 2.0) == 1.0);
  CHECK(radius_certificate(Regularizer::l1, 2.0) == 1.0);
  CHECK_THROWS_AS(regularizer_from_string("l3"), std::invalid_argument);
}

}

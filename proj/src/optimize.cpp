#include "kgood/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

namespace kgood {

std::string to_string(Regularizer reg) { return reg == Regularizer::l2 ? "l2" : "l1"; }

Regularizer regularizer_from_string(const std::string& name) {
  if (name == "l2" || name == "L2") return Regularizer::l2;
  if (name == "l1" || name == "L1") return Regularizer::l1;
  throw std::invalid_argument("unknown regularizer '" + name + "' (expected l2 or l1)");
}

double radius_certificate(Regularizer reg, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be > 0");
  return reg == Regularizer::l2 ? std::sqrt(2.0 / lambda) : 2.0 / lambda;
}

namespace {

double penalty(std::span<const double> mu, double lambda, Regularizer reg) {
  double s = 0.0;
  if (reg == Regularizer::l2) {
    for (double v : mu) s += v * v;
  } else {
    for (double v : mu) s += std::abs(v);
  }
  return 0.5 * lambda * s;
}

}  // namespace

double objective(const PairSet& pairs, std::span<const double> mu, double lambda, Regularizer reg) {
  return penalty(mu, lambda, reg) + pairs.mean_hinge(mu);
}

double objective_l2(std::span<const double> mu, const LabeledDataset& data,
                    std::span<const BaseKernel> kernels, double lambda) {
  return penalty(mu, lambda, Regularizer::l2) + empirical_risk(mu, data, kernels);
}

double objective_l1(std::span<const double> mu, const LabeledDataset& data,
                    std::span<const BaseKernel> kernels, double lambda) {
  return penalty(mu, lambda, Regularizer::l1) + empirical_risk(mu, data, kernels);
}

std::vector<double> subgradient_risk(std::span<const double> mu, std::span<const KSpacePair> pairs) {
  if (pairs.empty()) throw std::invalid_argument("subgradient_risk: no pairs");
  std::vector<double> g(mu.size(), 0.0);
  for (const auto& pair : pairs) {
    if (pair.z.size() != mu.size()) throw std::invalid_argument("subgradient_risk: length mismatch");
    if (pair.label_product * inner(mu, pair.z) < 1.0) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= pair.label_product * pair.z[i];
    }
  }
  for (double& v : g) v /= static_cast<double>(pairs.size());
  return g;
}

std::vector<double> subgradient_risk(std::span<const double> mu, const PairSet& pairs) {
  if (mu.size() != pairs.dim()) throw std::invalid_argument("subgradient_risk: length mismatch");
  std::vector<double> g(mu.size(), 0.0);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto a = pairs.row(k);
    if (inner(mu, a) < 1.0) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= a[i];
    }
  }
  for (double& v : g) v /= static_cast<double>(pairs.size());
  return g;
}

std::vector<double> project_nonneg(std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x = x > 0.0 ? x : 0.0;
  return out;
}

std::vector<double> project_feasible(std::span<const double> v, Regularizer reg, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("project_feasible: radius must be > 0");
  std::vector<double> out = project_nonneg(v);
  if (reg == Regularizer::l2) {
    double sq = 0.0;
    for (double x : out) sq += x * x;
    const double norm = std::sqrt(sq);
    if (norm > radius) {
      for (double& x : out) x *= radius / norm;
    }
    return out;
  }
  const double sum = std::accumulate(out.begin(), out.end(), 0.0);
  if (sum <= radius) return out;
  // Simplex projection of v onto {x >= 0, sum x = radius}.
  std::vector<double> sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    cumulative += sorted[j];
    const double t = (cumulative - radius) / static_cast<double>(j + 1);
    if (sorted[j] - t > 0.0) theta = t;
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(v[i] - theta, 0.0);
  return out;
}

namespace {

double dual_from_v(double alpha_mean, std::span<const double> v, double lambda, Regularizer reg) {
  if (reg == Regularizer::l2) {
    double sq = 0.0;
    for (double x : v) {
      if (x > 0.0) sq += x * x;
    }
    return alpha_mean - sq / (2.0 * lambda);
  }
  double worst = 0.0;
  for (double x : v) worst = std::max(worst, x - 0.5 * lambda);
  return alpha_mean - (2.0 / lambda) * worst;
}

}  // namespace

double dual_value(const PairSet& pairs, std::span<const double> alpha, double lambda,
                  Regularizer reg) {
  if (alpha.size() != pairs.size()) throw std::invalid_argument("dual_value: alpha length mismatch");
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
  std::vector<double> v(pairs.dim(), 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const double a = alpha[k];
    if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("dual_value: alpha must lie in [0, 1]");
    if (a == 0.0) continue;
    total += a;
    const auto row = pairs.row(k);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += a * row[i];
  }
  const double count = static_cast<double>(pairs.size());
  for (double& x : v) x /= count;
  return dual_from_v(total / count, v, lambda, reg);
}

namespace {

constexpr double kTightTol = 1e-7;

class Solver {
 public:
  Solver(const PairSet& pairs, const SolverConfig& cfg)
      : pairs_(pairs), cfg_(cfg), p_(pairs.dim()), n_(pairs.size()),
        radius_(radius_certificate(cfg.reg, cfg.lambda)) {}

  SolveResult run();

 private:
  void margins(std::span<const double> mu, std::vector<double>& out) const {
    out.resize(n_);
    const double* a = pairs_.rows().data();
    for (std::size_t k = 0; k < n_; ++k, a += p_) {
      double m = 0.0;
      for (std::size_t i = 0; i < p_; ++i) m += mu[i] * a[i];
      out[k] = m;
    }
  }

  void consider(const std::vector<double>& mu) {
    const double obj = objective(pairs_, mu, cfg_.lambda, cfg_.reg);
    if (obj < best_obj_) {
      best_obj_ = obj;
      best_mu_ = mu;
    }
  }

  void polish(const std::vector<double>& center, const std::vector<double>& pos_fraction);
  void dual_from_tight(const std::vector<double>& mu);

  const PairSet& pairs_;
  const SolverConfig& cfg_;
  std::size_t p_;
  std::size_t n_;
  double radius_;
  std::vector<double> best_mu_;
  double best_obj_ = std::numeric_limits<double>::infinity();
  double best_dual_ = 0.0;
  std::vector<double> scratch_;
};

void Solver::polish(const std::vector<double>& center, const std::vector<double>& pos_fraction) {
  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < p_; ++i) {
    if (pos_fraction[i] >= 0.5) support.push_back(i);
  }
  if (support.empty()) return;
  const std::size_t s = support.size();

  margins(center, scratch_);
  const std::vector<double> m = scratch_;
  std::vector<std::size_t> order(n_);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto closer = [&](std::size_t a, std::size_t b) {
    const double da = std::abs(m[a] - 1.0);
    const double db = std::abs(m[b] - 1.0);
    return da < db || (da == db && a < b);
  };
  const std::size_t pool = std::min(n_, 4 * p_ + 8);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(pool), order.end(), closer);

  // Greedy linearly independent set of near-tight pairs, restricted to the support.
  std::vector<std::size_t> tight;
  std::vector<Eigen::VectorXd> basis;
  for (std::size_t idx = 0; idx < pool && tight.size() < s; ++idx) {
    const std::size_t k = order[idx];
    const auto row = pairs_.row(k);
    Eigen::VectorXd r(static_cast<Eigen::Index>(s));
    for (std::size_t j = 0; j < s; ++j) r(static_cast<Eigen::Index>(j)) = row[support[j]];
    const double scale = r.norm();
    if (scale == 0.0) continue;
    Eigen::VectorXd res = r;
    for (const auto& b : basis) res -= b.dot(res) * b;
    if (res.norm() <= 1e-9 * scale) continue;
    basis.push_back(res / res.norm());
    tight.push_back(k);
  }

  std::vector<char> in_tight(n_, 0);
  for (std::size_t k : tight) in_tight[k] = 1;
  // Mean of the rows that are strictly active and not pinned.
  Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s));
  for (std::size_t k = 0; k < n_; ++k) {
    if (in_tight[k] || !(m[k] < 1.0)) continue;
    const auto row = pairs_.row(k);
    for (std::size_t j = 0; j < s; ++j) g(static_cast<Eigen::Index>(j)) += row[support[j]];
  }
  g /= static_cast<double>(n_);

  Eigen::MatrixXd a_full(static_cast<Eigen::Index>(tight.size()), static_cast<Eigen::Index>(s));
  for (std::size_t t = 0; t < tight.size(); ++t) {
    const auto row = pairs_.row(tight[t]);
    for (std::size_t j = 0; j < s; ++j) a_full(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = row[support[j]];
  }
  Eigen::VectorXd mu_s(static_cast<Eigen::Index>(s));
  for (std::size_t j = 0; j < s; ++j) mu_s(static_cast<Eigen::Index>(j)) = center[support[j]];

  auto lift = [&](const Eigen::VectorXd& x) {
    std::vector<double> full(p_, 0.0);
    for (std::size_t j = 0; j < s; ++j) full[support[j]] = x(static_cast<Eigen::Index>(j));
    return project_feasible(full, cfg_.reg, radius_);
  };

  const std::size_t first = cfg_.reg == Regularizer::l2 ? 0 : 1;
  for (std::size_t t = first; t <= tight.size(); ++t) {
    const auto rows = static_cast<Eigen::Index>(t);
    const Eigen::MatrixXd a = a_full.topRows(rows);
    Eigen::VectorXd x;
    if (cfg_.reg == Regularizer::l2) {
      // Unpinned near-tight pairs keep their current side of the margin.
      Eigen::VectorXd gt = g;
      for (std::size_t j = t; j < tight.size(); ++j) {
        if (m[tight[j]] < 1.0) gt += a_full.row(static_cast<Eigen::Index>(j)).transpose() / static_cast<double>(n_);
      }
      // Stationarity lambda mu_S = g + A^T nu with A mu_S = 1.
      Eigen::VectorXd nu = Eigen::VectorXd::Zero(rows);
      if (t > 0) {
        const Eigen::MatrixXd gram = a * a.transpose();
        const Eigen::VectorXd rhs = Eigen::VectorXd::Constant(rows, cfg_.lambda) - a * gt;
        nu = gram.ldlt().solve(rhs);
      }
      x = (gt + a.transpose() * nu) / cfg_.lambda;
    } else {
      const Eigen::MatrixXd gram = a * a.transpose();
      const Eigen::VectorXd resid = a * mu_s - Eigen::VectorXd::Ones(rows);
      x = mu_s - a.transpose() * gram.ldlt().solve(resid);
    }
    if (!x.allFinite()) continue;
    const auto candidate = lift(x);
    consider(candidate);
  }
}

void Solver::dual_from_tight(const std::vector<double>& mu) {
  margins(mu, scratch_);
  const std::vector<double>& m = scratch_;
  std::vector<double> alpha(n_, 0.0);
  std::vector<std::size_t> tight;
  for (std::size_t k = 0; k < n_; ++k) {
    if (m[k] < 1.0 - kTightTol) {
      alpha[k] = 1.0;
    } else if (m[k] <= 1.0 + kTightTol) {
      tight.push_back(k);
    }
  }
  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < p_; ++i) {
    if (mu[i] > 0.0) support.push_back(i);
  }
  if (!tight.empty() && !support.empty() && tight.size() <= 20000) {
    const auto s = static_cast<Eigen::Index>(support.size());
    Eigen::VectorXd g = Eigen::VectorXd::Zero(s);
    for (std::size_t k = 0; k < n_; ++k) {
      if (alpha[k] == 0.0) continue;
      const auto row = pairs_.row(k);
      for (Eigen::Index j = 0; j < s; ++j) g(j) += row[support[static_cast<std::size_t>(j)]];
    }
    const double count = static_cast<double>(n_);
    g /= count;
    Eigen::MatrixXd mat(s, static_cast<Eigen::Index>(tight.size()));
    for (std::size_t t = 0; t < tight.size(); ++t) {
      const auto row = pairs_.row(tight[t]);
      for (Eigen::Index j = 0; j < s; ++j) mat(j, static_cast<Eigen::Index>(t)) = row[support[static_cast<std::size_t>(j)]] / count;
    }
    Eigen::VectorXd target(s);
    for (Eigen::Index j = 0; j < s; ++j) {
      const double mj = mu[support[static_cast<std::size_t>(j)]];
      target(j) = (cfg_.reg == Regularizer::l2 ? cfg_.lambda * mj : 0.5 * cfg_.lambda) - g(j);
    }
    const Eigen::VectorXd w = mat.completeOrthogonalDecomposition().solve(target);
    if (w.allFinite()) {
      for (std::size_t t = 0; t < tight.size(); ++t) {
        alpha[tight[t]] = std::clamp(w(static_cast<Eigen::Index>(t)), 0.0, 1.0);
      }
    }
  }
  best_dual_ = std::max(best_dual_, dual_value(pairs_, alpha, cfg_.lambda, cfg_.reg));
}

SolveResult Solver::run() {
  SolveResult result;
  result.radius_certificate = radius_;
  const StepSchedule schedule = cfg_.step_schedule.value_or(
      cfg_.reg == Regularizer::l2 ? StepSchedule::strongly_convex : StepSchedule::sqrt_decay);
  const bool stochastic = pairs_.subsampled() ||
                          (cfg_.minibatch_pairs > 0 && n_ > 64 * cfg_.minibatch_pairs);
  result.stochastic = stochastic;
  result.subsampled = pairs_.subsampled();

  const std::size_t total = cfg_.max_iters;
  std::vector<std::size_t> checkpoints;
  for (std::size_t c = total; c >= 1; c /= 2) {
    checkpoints.push_back(c);
    if (c / 2 < 32) break;
  }
  std::reverse(checkpoints.begin(), checkpoints.end());

  std::vector<double> mu(p_, 0.0);
  best_mu_ = mu;
  best_obj_ = objective(pairs_, mu, cfg_.lambda, cfg_.reg);
  best_dual_ = 0.0;

  const double g_scale = 1.0 + pairs_.max_row_norm();
  Rng rng(derive_seed(cfg_.seed, 0x51d));

  std::vector<double> sum_mu(p_, 0.0), pos_count(p_, 0.0), grad(p_), step(p_);
  std::vector<std::uint32_t> active_count(stochastic ? 0 : n_, 0);
  std::size_t window_len = 0;
  std::size_t window_start = checkpoints.front() / 2;
  std::size_t next_cp = 0;
  std::size_t iterations = 0;
  double gap = std::numeric_limits<double>::infinity();

  for (std::size_t t = 0; t < total; ++t) {
    const bool in_window = t >= window_start;
    std::fill(grad.begin(), grad.end(), 0.0);
    if (!stochastic) {
      const double* a = pairs_.rows().data();
      for (std::size_t k = 0; k < n_; ++k, a += p_) {
        double m = 0.0;
        for (std::size_t i = 0; i < p_; ++i) m += mu[i] * a[i];
        if (m < 1.0) {
          for (std::size_t i = 0; i < p_; ++i) grad[i] -= a[i];
          if (in_window) ++active_count[k];
        }
      }
      for (double& x : grad) x /= static_cast<double>(n_);
    } else {
      const std::size_t batch = std::max<std::size_t>(1, cfg_.minibatch_pairs);
      for (std::size_t b = 0; b < batch; ++b) {
        const auto a = pairs_.row(static_cast<std::size_t>(uniform_index(rng, n_)));
        if (inner(mu, a) < 1.0) {
          for (std::size_t i = 0; i < p_; ++i) grad[i] -= a[i];
        }
      }
      for (double& x : grad) x /= static_cast<double>(batch);
    }
    if (in_window) {
      for (std::size_t i = 0; i < p_; ++i) {
        sum_mu[i] += mu[i];
        if (mu[i] > 0.0) pos_count[i] += 1.0;
      }
      ++window_len;
    }

    const double tt = static_cast<double>(t + 1);
    double eta = 0.0;
    if (schedule == StepSchedule::strongly_convex) {
      eta = 1.0 / (cfg_.lambda * tt);
    } else {
      eta = radius_ / (g_scale * std::sqrt(tt));
    }
    for (std::size_t i = 0; i < p_; ++i) {
      const double reg_grad = cfg_.reg == Regularizer::l2 ? cfg_.lambda * mu[i] : 0.5 * cfg_.lambda;
      step[i] = mu[i] - eta * (grad[i] + reg_grad);
    }
    mu = project_feasible(step, cfg_.reg, radius_);
    iterations = t + 1;

    if (next_cp < checkpoints.size() && t + 1 == checkpoints[next_cp]) {
      const double len = static_cast<double>(std::max<std::size_t>(window_len, 1));
      std::vector<double> candidate(p_);
      std::vector<double> fraction(p_);
      for (std::size_t i = 0; i < p_; ++i) {
        candidate[i] = sum_mu[i] / len;
        fraction[i] = pos_count[i] / len;
      }
      if (cfg_.averaging == Averaging::final_iterate) candidate = mu;
      candidate = project_feasible(candidate, cfg_.reg, radius_);
      consider(candidate);
      if (!stochastic && window_len > 0) {
        std::vector<double> alpha(n_);
        for (std::size_t k = 0; k < n_; ++k) alpha[k] = static_cast<double>(active_count[k]) / len;
        best_dual_ = std::max(best_dual_, dual_value(pairs_, alpha, cfg_.lambda, cfg_.reg));
      }
      if (cfg_.polish) {
        polish(candidate, fraction);
        dual_from_tight(best_mu_);
      }
      gap = std::max(0.0, best_obj_ - best_dual_);
      if (gap <= cfg_.epsilon_opt) break;

      ++next_cp;
      window_start = t + 1;
      window_len = 0;
      std::fill(sum_mu.begin(), sum_mu.end(), 0.0);
      std::fill(pos_count.begin(), pos_count.end(), 0.0);
      std::fill(active_count.begin(), active_count.end(), 0u);
    }
  }

  result.mu_hat = best_mu_;
  result.objective = best_obj_;
  result.empirical_risk = pairs_.mean_hinge(best_mu_);
  result.iterations = iterations;
  result.gap_estimate = std::isfinite(gap) ? gap : std::max(0.0, best_obj_ - best_dual_);
  result.converged = result.gap_estimate <= cfg_.epsilon_opt;
  return result;
}

void check_config(const SolverConfig& cfg) {
  if (!(cfg.lambda > 0.0) || !std::isfinite(cfg.lambda)) {
    throw std::invalid_argument("lambda must be a finite value > 0");
  }
  if (cfg.max_iters == 0) throw std::invalid_argument("max_iters must be >= 1");
  if (!(cfg.epsilon_opt >= 0.0)) throw std::invalid_argument("epsilon_opt must be >= 0");
}

}  // namespace

SolveResult solve(const PairSet& pairs, const SolverConfig& config) {
  check_config(config);
  if (pairs.size() == 0) throw std::invalid_argument("solve: no pairs");
  Solver solver(pairs, config);
  return solver.run();
}

SolveResult solve(const LabeledDataset& data, std::span<const BaseKernel> kernels,
                  const SolverConfig& config) {
  check_config(config);
  PairOptions opts;
  opts.max_pairs = config.max_enumerated_pairs;
  opts.seed = config.seed;
  const PairSet pairs = PairSet::enumerate(data, kernels, opts);
  return solve(pairs, config);
}

SolveResult solve_l2(const LabeledDataset& data, std::span<const BaseKernel> kernels,
                     SolverConfig config) {
  config.reg = Regularizer::l2;
  return solve(data, kernels, config);
}

SolveResult solve_l1(const LabeledDataset& data, std::span<const BaseKernel> kernels,
                     SolverConfig config) {
  config.reg = Regularizer::l1;
  return solve(data, kernels, config);
}

}  // namespace kgood

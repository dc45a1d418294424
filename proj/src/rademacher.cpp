#include "kgood/rademacher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "kgood/rng.hpp"

namespace kgood {

double ball_support(const Ball& ball, std::span<const double> v) {
  if (ball.kind == BallKind::l2) {
    double sq = 0.0;
    for (double x : v) {
      if (!ball.nonneg || x > 0.0) sq += x * x;
    }
    return ball.radius * std::sqrt(sq);
  }
  double best = 0.0;
  for (double x : v) best = std::max(best, ball.nonneg ? x : std::abs(x));
  return ball.radius * best;
}

namespace {

void check_ball(const Ball& ball) {
  if (!(ball.radius >= 0.0)) throw std::invalid_argument("ball radius must be >= 0");
}

struct Welford {
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t count = 0;

  void add(double x) {
    ++count;
    const double d = x - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (x - mean);
  }
  double std_error() const {
    if (count < 2) return 0.0;
    return std::sqrt(std::max(0.0, m2 / static_cast<double>(count - 1)) / static_cast<double>(count));
  }
};

double sign_of(std::uint64_t bits, std::size_t i) { return ((bits >> i) & 1u) ? -1.0 : 1.0; }

double tolerance(double a, double b) { return 1e-12 * (1.0 + std::abs(a) + std::abs(b)); }

}  // namespace

RademacherEstimate empirical_rademacher(const Eigen::MatrixXd& features, const Ball& ball,
                                        const ExpectationMode& mode) {
  check_ball(ball);
  const auto m = static_cast<std::size_t>(features.rows());
  const auto p = static_cast<std::size_t>(features.cols());
  if (m == 0) throw std::invalid_argument("empirical_rademacher: need at least one feature vector");
  RademacherEstimate est;
  est.ball = ball;
  est.exhaustive = mode.exhaustive;
  std::vector<double> sum(p);
  auto sup_for = [&](auto&& sign) {
    std::fill(sum.begin(), sum.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const double e = sign(i);
      for (std::size_t j = 0; j < p; ++j) sum[j] += e * features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    return ball_support(ball, sum);
  };
  const double inv_m = 1.0 / static_cast<double>(m);
  if (mode.exhaustive) {
    if (m > kMaxExhaustiveSigns) {
      throw std::invalid_argument("exhaustive Rademacher enumeration is limited to m <= 20");
    }
    const std::uint64_t patterns = std::uint64_t{1} << m;
    double total = 0.0;
    for (std::uint64_t bits = 0; bits < patterns; ++bits) {
      total += sup_for([&](std::size_t i) { return sign_of(bits, i); });
    }
    est.value = inv_m * total / static_cast<double>(patterns);
    return est;
  }
  if (mode.draws == 0) throw std::invalid_argument("Monte Carlo mode needs draws >= 1");
  Rng rng(mode.seed);
  Welford acc;
  std::vector<double> signs(m);
  for (std::size_t d = 0; d < mode.draws; ++d) {
    for (double& s : signs) s = uniform_index(rng, 2) == 0 ? 1.0 : -1.0;
    acc.add(inv_m * sup_for([&](std::size_t i) { return signs[i]; }));
  }
  est.value = acc.mean;
  est.std_error = acc.std_error();
  return est;
}

PairFeatureTable PairFeatureTable::build(
    std::size_t atoms, std::size_t dim,
    const std::function<void(std::size_t, std::size_t, std::span<double>)>& f) {
  if (atoms == 0 || dim == 0) throw std::invalid_argument("PairFeatureTable: empty table");
  PairFeatureTable t;
  t.atoms = atoms;
  t.dim = dim;
  t.values.assign(atoms * atoms * dim, 0.0);
  for (std::size_t a = 0; a < atoms; ++a) {
    for (std::size_t b = 0; b < atoms; ++b) {
      f(a, b, std::span<double>(t.values.data() + (a * atoms + b) * dim, dim));
    }
  }
  return t;
}

InequalityCheck check_decoupling(const PairFeatureTable& table, const Ball& ball, std::size_t n,
                                 const ExpectationMode& mode) {
  check_ball(ball);
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("check_decoupling: n must be even and >= 2");
  if (table.atoms == 0 || table.dim == 0 || table.values.size() != table.atoms * table.atoms * table.dim) {
    throw std::invalid_argument("check_decoupling: malformed feature table");
  }
  for (std::size_t a = 0; a < table.atoms; ++a) {
    for (std::size_t b = a + 1; b < table.atoms; ++b) {
      const auto x = table.at(a, b);
      const auto y = table.at(b, a);
      if (!std::equal(x.begin(), x.end(), y.begin())) {
        throw std::invalid_argument("check_decoupling: pair features must be symmetric");
      }
    }
  }
  const std::size_t p = table.dim;
  const std::size_t half = n / 2;
  const double coupled_scale = 2.0 / (static_cast<double>(n) * static_cast<double>(n - 1));
  const double decoupled_scale = 2.0 / static_cast<double>(n);
  std::vector<double> coupled(p), decoupled(p);
  auto evaluate = [&](const std::vector<std::size_t>& x, double& lhs, double& rhs) {
    std::fill(coupled.begin(), coupled.end(), 0.0);
    std::fill(decoupled.begin(), decoupled.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const auto q = table.at(x[i], x[j]);
        for (std::size_t d = 0; d < p; ++d) coupled[d] += q[d];
      }
    }
    for (std::size_t i = 0; i < half; ++i) {
      const auto q = table.at(x[i], x[half + i]);
      for (std::size_t d = 0; d < p; ++d) decoupled[d] += q[d];
    }
    for (double& v : coupled) v *= coupled_scale;
    for (double& v : decoupled) v *= decoupled_scale;
    lhs = ball_support(ball, coupled);
    rhs = ball_support(ball, decoupled);
  };

  InequalityCheck out;
  std::vector<std::size_t> x(n, 0);
  if (mode.exhaustive) {
    double tuples = std::pow(static_cast<double>(table.atoms), static_cast<double>(n));
    if (tuples > static_cast<double>(std::size_t{1} << kMaxExhaustiveSigns)) {
      throw std::invalid_argument("check_decoupling: atoms^n exceeds the exhaustive limit 2^20");
    }
    const auto count = static_cast<std::size_t>(std::llround(tuples));
    double lhs_sum = 0.0, rhs_sum = 0.0;
    for (std::size_t t = 0; t < count; ++t) {
      double l = 0.0, r = 0.0;
      evaluate(x, l, r);
      lhs_sum += l;
      rhs_sum += r;
      for (std::size_t i = 0; i < n; ++i) {
        if (++x[i] < table.atoms) break;
        x[i] = 0;
      }
    }
    out.lhs = lhs_sum / static_cast<double>(count);
    out.rhs = rhs_sum / static_cast<double>(count);
    out.holds = out.lhs <= out.rhs + tolerance(out.lhs, out.rhs);
    return out;
  }
  if (mode.draws == 0) throw std::invalid_argument("Monte Carlo mode needs draws >= 1");
  Rng rng(mode.seed);
  Welford lhs_acc, rhs_acc, diff;
  for (std::size_t d = 0; d < mode.draws; ++d) {
    for (auto& v : x) v = static_cast<std::size_t>(uniform_index(rng, table.atoms));
    double l = 0.0, r = 0.0;
    evaluate(x, l, r);
    lhs_acc.add(l);
    rhs_acc.add(r);
    diff.add(r - l);
  }
  out.lhs = lhs_acc.mean;
  out.rhs = rhs_acc.mean;
  out.std_error = diff.std_error();
  out.holds = out.lhs <= out.rhs + 3.0 * out.std_error + tolerance(out.lhs, out.rhs);
  return out;
}

InequalityCheck check_contraction(const Eigen::MatrixXd& h_values, std::span<const double> labels,
                                  const ExpectationMode& mode) {
  const auto m = static_cast<std::size_t>(h_values.rows());
  const auto k = static_cast<std::size_t>(h_values.cols());
  if (m == 0 || k == 0) throw std::invalid_argument("check_contraction: empty hypothesis table");
  if (labels.size() != m) throw std::invalid_argument("check_contraction: label count mismatch");
  const double inv_m = 1.0 / static_cast<double>(m);
  auto evaluate = [&](auto&& sign, double& lhs, double& rhs) {
    lhs = -std::numeric_limits<double>::infinity();
    rhs = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      double wrapped = 0.0, raw = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double h = h_values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
        const double e = sign(i);
        wrapped += e * std::max(0.0, 1.0 - labels[i] * h);
        raw += e * h;
      }
      lhs = std::max(lhs, inv_m * wrapped);
      rhs = std::max(rhs, inv_m * raw);
    }
  };
  InequalityCheck out;
  if (mode.exhaustive) {
    if (m > kMaxExhaustiveSigns) {
      throw std::invalid_argument("exhaustive contraction check is limited to m <= 20");
    }
    const std::uint64_t patterns = std::uint64_t{1} << m;
    double lhs_sum = 0.0, rhs_sum = 0.0;
    for (std::uint64_t bits = 0; bits < patterns; ++bits) {
      double l = 0.0, r = 0.0;
      evaluate([&](std::size_t i) { return sign_of(bits, i); }, l, r);
      lhs_sum += l;
      rhs_sum += r;
    }
    out.lhs = lhs_sum / static_cast<double>(patterns);
    out.rhs = rhs_sum / static_cast<double>(patterns);
    out.holds = out.lhs <= out.rhs + tolerance(out.lhs, out.rhs);
    return out;
  }
  if (mode.draws == 0) throw std::invalid_argument("Monte Carlo mode needs draws >= 1");
  Rng rng(mode.seed);
  Welford lhs_acc, rhs_acc, diff;
  std::vector<double> signs(m);
  for (std::size_t d = 0; d < mode.draws; ++d) {
    for (double& s : signs) s = uniform_index(rng, 2) == 0 ? 1.0 : -1.0;
    double l = 0.0, r = 0.0;
    evaluate([&](std::size_t i) { return signs[i]; }, l, r);
    lhs_acc.add(l);
    rhs_acc.add(r);
    diff.add(r - l);
  }
  out.lhs = lhs_acc.mean;
  out.rhs = rhs_acc.mean;
  out.std_error = diff.std_error();
  out.holds = out.lhs <= out.rhs + 3.0 * out.std_error + tolerance(out.lhs, out.rhs);
  return out;
}

}  // namespace kgood

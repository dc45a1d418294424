#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the library's risk, solver or bound code; kernels are re-evaluated from
// their formulas.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

struct Kernel {
  enum Kind { linear, rbf, poly } kind = linear;
  double width = 1.0;
  int degree = 2;
  double offset = 1.0;
};

inline double eval(const Kernel& k, const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    sq += (a[i] - b[i]) * (a[i] - b[i]);
  }
  switch (k.kind) {
    case Kernel::linear: return dot;
    case Kernel::rbf: return std::exp(-sq / (k.width * k.width));
    case Kernel::poly: return std::pow(dot + k.offset, k.degree);
  }
  return 0.0;
}

struct Problem {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  std::vector<Kernel> kernels;
};

inline double margin(const Problem& pr, const std::vector<double>& mu, std::size_t i, std::size_t j) {
  double k = 0.0;
  for (std::size_t t = 0; t < mu.size(); ++t) k += mu[t] * eval(pr.kernels[t], pr.x[i], pr.x[j]);
  return pr.y[i] * pr.y[j] * k;
}

inline double hinge(double m) { return std::max(0.0, 1.0 - m); }

// Mean hinge over unordered pairs i < j.
inline double unordered_risk(const Problem& pr, const std::vector<double>& mu) {
  const std::size_t n = pr.x.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) s += hinge(margin(pr, mu, i, j));
  }
  return s / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

// Mean hinge over all n^2 ordered pairs, diagonal included.
inline double ordered_risk(const Problem& pr, const std::vector<double>& mu) {
  const std::size_t n = pr.x.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) s += hinge(margin(pr, mu, i, j));
  }
  return s / static_cast<double>(n * n);
}

inline double objective(const Problem& pr, const std::vector<double>& mu, double lambda, bool l1) {
  double reg = 0.0;
  for (double v : mu) reg += l1 ? std::abs(v) : v * v;
  return 0.5 * lambda * reg + unordered_risk(pr, mu);
}

// (1/m) sum_i [1 - y_i (1/m) sum_j y_j K_mu(x_i, x_j)]_+
inline double mean_embedding(const Problem& pr, const std::vector<double>& mu) {
  const std::size_t n = pr.x.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double f = 0.0;
    for (std::size_t j = 0; j < n; ++j) f += margin(pr, mu, i, j);
    s += hinge(f / static_cast<double>(n));
  }
  return s / static_cast<double>(n);
}

struct GridMin {
  double value = 0.0;
  std::vector<double> argmin;
};

// Exhaustive search of a 2-d objective over [lo, hi]^2 at the given step.
template <typename F>
GridMin grid_search_2d(F&& f, double lo, double hi, double step) {
  GridMin best{INFINITY, {lo, lo}};
  const auto count = static_cast<std::size_t>(std::llround((hi - lo) / step));
  for (std::size_t a = 0; a <= count; ++a) {
    for (std::size_t b = 0; b <= count; ++b) {
      const std::vector<double> mu{lo + step * static_cast<double>(a), lo + step * static_cast<double>(b)};
      const double v = f(mu);
      if (v < best.value) best = {v, mu};
    }
  }
  return best;
}

// (1/m) E_eps sup over a finite candidate set of sum_i eps_i <mu, z_i>, by
// enumerating every sign pattern. A lower bound on the ball supremum.
inline double rademacher_over_candidates(const std::vector<std::vector<double>>& z,
                                         const std::vector<std::vector<double>>& candidates) {
  const std::size_t m = z.size();
  double total = 0.0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
    double best = -INFINITY;
    for (const auto& mu : candidates) {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double sign = (mask >> i) & 1U ? 1.0 : -1.0;
        for (std::size_t d = 0; d < mu.size(); ++d) s += sign * mu[d] * z[i][d];
      }
      best = std::max(best, s);
    }
    total += best;
  }
  return total / static_cast<double>(std::size_t{1} << m) / static_cast<double>(m);
}

}  // namespace oracle

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace kgood {

enum class BallKind { l2, l1 };

struct Ball {
  BallKind kind = BallKind::l2;
  double radius = 1.0;
  bool nonneg = false;  // intersect with the nonnegative orthant
};

// sup over the ball of <mu, v>: r||v||_2, r||[v]_+||_2, s||v||_inf or
// s max(max_i v_i, 0).
double ball_support(const Ball& ball, std::span<const double> v);

inline constexpr std::size_t kMaxExhaustiveSigns = 20;

struct ExpectationMode {
  bool exhaustive = true;
  std::size_t draws = 10'000;  // Monte Carlo only
  std::uint64_t seed = 0;
};

struct RademacherEstimate {
  double value = 0.0;
  double std_error = 0.0;
  bool exhaustive = true;
  Ball ball;
};

// (1/m) E_eps sup_{mu in ball} sum_i eps_i <mu, z_i> for the m rows of
// `features` (m x p). Exhaustive mode enumerates all 2^m sign patterns and is
// limited to m <= 20.
RademacherEstimate empirical_rademacher(const Eigen::MatrixXd& features, const Ball& ball,
                                        const ExpectationMode& mode);

struct InequalityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double std_error = 0.0;  // of rhs - lhs, Monte Carlo only
  bool holds = false;
};

// Symmetric pair feature map over the atoms {0, ..., k-1} of a uniform
// finite distribution: returns q(a, b) in R^p.
struct PairFeatureTable {
  std::size_t atoms = 0;
  std::size_t dim = 0;
  std::vector<double> values;  // (atoms * atoms) x dim

  std::span<const double> at(std::size_t a, std::size_t b) const {
    return {values.data() + (a * atoms + b) * dim, dim};
  }
  static PairFeatureTable build(std::size_t atoms, std::size_t dim,
                                const std::function<void(std::size_t, std::size_t, std::span<double>)>& f);
};

// Compares, for X_1..X_n iid uniform over the atoms and the linear class
// q_mu(a, b) = <mu, table(a, b)>, mu in ball,
//   lhs = E sup_mu (2/(n(n-1))) sum_{i<j} q_mu(X_i, X_j)
//   rhs = E sup_mu (2/n) sum_{i<=n/2} q_mu(X_i, X_{n/2+i})
// Exhaustive mode enumerates all atoms^n tuples (at most 2^20). Throws for odd n
// or an asymmetric table.
InequalityCheck check_decoupling(const PairFeatureTable& table, const Ball& ball, std::size_t n,
                                 const ExpectationMode& mode);

// Compares, over sign vectors eps in {-1,+1}^m,
//   lhs = E sup_h (1/m) sum_i eps_i [1 - a_i h(x_i)]_+
//   rhs = E sup_h (1/m) sum_i eps_i h(x_i)
// where h_values is m x k (column = hypothesis) and a = labels.
InequalityCheck check_contraction(const Eigen::MatrixXd& h_values, std::span<const double> labels,
                                  const ExpectationMode& mode);

}  // namespace kgood

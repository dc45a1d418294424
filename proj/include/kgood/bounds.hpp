#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "kgood/kernels.hpp"
#include "kgood/optimize.hpp"

namespace kgood {

// Natural logarithms throughout. Kernel counts are taken as reals so that
// log p can be dialed directly (p = e gives log p = 1).
//
// Rademacher terms are computed on n_even = 2 floor(n / 2): an odd sample is
// split into n/2 pairs with one point discarded.

enum class BoundForm { exact, simplified };

std::string to_string(BoundForm form);

// r * kappa_l2 * sqrt(2 / n_even). Throws std::invalid_argument for n < 2.
double rad_bound_l2(double r, double kappa_l2, std::size_t n);

// s * kappa_linf * sqrt(2 log p / n_even). Throws std::domain_error for p <= 2:
// the q-norm exponent log p / (log p - 1) is degenerate there.
double rad_bound_l1(double s, double kappa_linf, std::size_t n, double p);

// McDiarmid deviation (1 + c) sqrt(2 log(1/delta) / n) with c the sup of
// K_mu over the hypothesis ball.
double mcdiarmid_term(double sup_kernel, std::size_t n, double delta);

struct BoundInputs {
  std::size_t n = 2;
  double p = 1.0;
  double lambda = 1.0;
  double delta = 0.1;
  double kappa_l2 = 1.0;
  double kappa_linf = 1.0;
  std::optional<double> r;  // fixed L2 radius for the reverse bound
  std::optional<double> s;  // fixed L1 radius for the reverse bound
};

// Throws std::invalid_argument unless n >= 2, 0 < delta <= 1, lambda > 0 and
// the kappa norms are nonnegative. delta = 1 is the degenerate limit where
// every log(1/delta) term vanishes.
void validate(const BoundInputs& in);

// R(mu) - Rhat(mu) for the L2-regularized minimizer:
//   exact       4 K2 sqrt(1/(lambda n)) + (1 + K2 sqrt(2/lambda)) sqrt(2 log(1/delta)/n)
//   simplified  6 K2 sqrt(log(1/delta)/(lambda n))
double gen_bound_l2(const BoundInputs& in, BoundForm form);

// R(mu) - Rhat(mu) for the L1-regularized minimizer:
//   exact       (4 Kinf/lambda) sqrt(2 log p/n) + (1 + 2 Kinf/lambda) sqrt(2 log(1/delta)/n)
//   simplified  (6 Kinf/(lambda sqrt n)) (sqrt(log p) + sqrt(log(1/delta)))
double gen_bound_l1(const BoundInputs& in, BoundForm form);

// Rhat(mu) - R(mu) uniformly over B2(r):
//   2 r K2 sqrt(2/n) + (1 + r K2) sqrt(2 log(1/delta)/n)
double uniform_dev_bound_l2(double r, double kappa_l2, std::size_t n, double delta);

// Rhat(mu) - R(mu) uniformly over B1(s):
//   2 s Kinf sqrt(2 log p/n) + (1 + s Kinf) sqrt(2 log(1/delta)/n)
double uniform_dev_bound_l1(double s, double kappa_linf, std::size_t n, double p, double delta);

struct OracleSampleSize {
  std::size_t n = 0;
  double lambda = 0.0;
};

// L2 oracle rule: lambda = 2 eps1 / (3 ||mu_o||^2) and
//   n >= (500 / eps1^3) ||mu_o||^2 K2^2 log(1/delta)   for eps1 < 3/4
//   n >= (650 / eps1^2) ||mu_o||^2 K2^2 log(1/delta)   for eps1 >= 3/4
OracleSampleSize oracle_sample_size_l2(double mu_o_l2, double kappa_l2, double eps1, double delta);

// L1 oracle rule as printed: lambda = 2 eps1 / (3 ||mu_o||_1) and
//   n >= 135 ||mu_o||_1 Kinf (sqrt(log p) + sqrt(log(1/delta))) / eps1^2
OracleSampleSize oracle_sample_size_l1(double mu_o_l1, double kappa_linf, double eps1,
                                       double delta, double p);

// Smallest n for which, with the same lambda, the L1 oracle chain
//   (lambda/2)||mu_o||_1 + 6 Kinf (sqrt(log p) + sqrt(log 1/delta)) (||mu_o||_1 + 1/lambda) / sqrt(n)
// stays below eps1, i.e. each of the three eps1/3 budgets is actually met.
OracleSampleSize oracle_sample_size_l1_sufficient(double mu_o_l1, double kappa_linf, double eps1,
                                                  double delta, double p);

struct GoodnessParams {
  double epsilon = 0.0;
  double gamma = 0.0;
};

// An eps-combination-good mu >= 0 yields an (eps, 1/<mu, kappa>)-good kernel.
// Throws std::domain_error when <mu, kappa> == 0.
GoodnessParams kernel_goodness_params(std::span<const double> mu, const KappaVector& kappa,
                                      double eps);

// Worst-case margins implied by the radius certificates.
double gamma_certificate_l2(double lambda, double kappa_l2);     // sqrt(lambda/2) / K2
double gamma_certificate_l1(double lambda, double kappa_linf);   // lambda / (2 Kinf)
double gamma_common_bound_l2(double lambda, double kappa_sq, double p);  // sqrt(lambda/(2p)) / kappa^2

// ceil(C kappa^4 log(1/delta) / (eps1^2 gamma^2)).
std::size_t second_stage_sample_size(double kappa, double gamma, double eps1, double delta,
                                     double constant = 1.0);

// Ceiling that snaps values within a relative 1e-9 of an integer onto it, so
// that e.g. 4000 * (1 + 1e-16) is counted as 4000.
std::size_t ceil_count(double x);

struct BoundReport {
  BoundInputs inputs;
  Regularizer reg = Regularizer::l2;
  BoundForm requested_form = BoundForm::exact;
  std::size_t n_even = 0;
  bool odd_n_discard = false;
  double radius = 0.0;        // r_lambda or s_lambda
  double rademacher = 0.0;    // bound on R_{n/2} over the certificate ball
  double mcdiarmid = 0.0;
  double gen_bound_exact = 0.0;
  double gen_bound_simplified = 0.0;
  double exact_minus_simplified = 0.0;
  double gen_bound = 0.0;     // the requested form
  double gamma_certificate = 0.0;
  std::optional<double> uniform_dev;  // for inputs.r / inputs.s when given
  std::vector<std::string> warnings;
};

BoundReport bound_report(const BoundInputs& inputs, Regularizer reg, BoundForm form);

nlohmann::json to_json(const BoundReport& report);

}  // namespace kgood

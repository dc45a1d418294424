#include "kgood/bounds.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace kgood {

std::string to_string(BoundForm form) { return form == BoundForm::exact ? "exact" : "simplified"; }

namespace {

std::size_t even_part(std::size_t n) {
  if (n < 2) throw std::invalid_argument("bounds need n >= 2");
  return 2 * (n / 2);
}

double log_inv(double delta) { return std::log(1.0 / delta); }

void check_delta(double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("delta must lie in (0, 1]");
}

void check_log_p(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("p must be >= 1");
}

}  // namespace

double rad_bound_l2(double r, double kappa_l2, std::size_t n) {
  const auto ne = static_cast<double>(even_part(n));
  return r * kappa_l2 * std::sqrt(2.0 / ne);
}

double rad_bound_l1(double s, double kappa_linf, std::size_t n, double p) {
  if (!(p > 2.0)) {
    throw std::domain_error("l1 Rademacher bound needs p > 2: the dual exponent q = log p / (log p - 1) "
                            "degenerates for p <= e");
  }
  const auto ne = static_cast<double>(even_part(n));
  return s * kappa_linf * std::sqrt(2.0 * std::log(p) / ne);
}

double mcdiarmid_term(double sup_kernel, std::size_t n, double delta) {
  check_delta(delta);
  if (n == 0) throw std::invalid_argument("bounds need n >= 2");
  return (1.0 + sup_kernel) * std::sqrt(2.0 * log_inv(delta) / static_cast<double>(n));
}

void validate(const BoundInputs& in) {
  if (in.n < 2) throw std::invalid_argument("n must be >= 2");
  check_delta(in.delta);
  if (!(in.lambda > 0.0) || !std::isfinite(in.lambda)) throw std::invalid_argument("lambda must be > 0");
  if (!(in.kappa_l2 >= 0.0) || !(in.kappa_linf >= 0.0)) {
    throw std::invalid_argument("kappa norms must be >= 0");
  }
  check_log_p(in.p);
  if (in.r && !(*in.r >= 0.0)) throw std::invalid_argument("r must be >= 0");
  if (in.s && !(*in.s >= 0.0)) throw std::invalid_argument("s must be >= 0");
}

namespace {

// Rademacher part on n_even without the p > 2 guard.
double l1_complexity(double s, double kappa_linf, std::size_t n, double p) {
  const auto ne = static_cast<double>(even_part(n));
  return s * kappa_linf * std::sqrt(2.0 * std::log(p) / ne);
}

}  // namespace

double gen_bound_l2(const BoundInputs& in, BoundForm form) {
  validate(in);
  const double n = static_cast<double>(in.n);
  const double k = in.kappa_l2;
  if (form == BoundForm::simplified) return 6.0 * k * std::sqrt(log_inv(in.delta) / (in.lambda * n));
  const double r = std::sqrt(2.0 / in.lambda);
  return 2.0 * rad_bound_l2(r, k, in.n) + mcdiarmid_term(r * k, in.n, in.delta);
}

double gen_bound_l1(const BoundInputs& in, BoundForm form) {
  validate(in);
  const double n = static_cast<double>(in.n);
  const double k = in.kappa_linf;
  if (form == BoundForm::simplified) {
    return 6.0 * k / (in.lambda * std::sqrt(n)) *
           (std::sqrt(std::log(in.p)) + std::sqrt(log_inv(in.delta)));
  }
  const double s = 2.0 / in.lambda;
  return 2.0 * l1_complexity(s, k, in.n, in.p) + mcdiarmid_term(s * k, in.n, in.delta);
}

double uniform_dev_bound_l2(double r, double kappa_l2, std::size_t n, double delta) {
  if (!(r >= 0.0) || !(kappa_l2 >= 0.0)) throw std::invalid_argument("r and kappa must be >= 0");
  return 2.0 * rad_bound_l2(r, kappa_l2, n) + mcdiarmid_term(r * kappa_l2, n, delta);
}

double uniform_dev_bound_l1(double s, double kappa_linf, std::size_t n, double p, double delta) {
  if (!(s >= 0.0) || !(kappa_linf >= 0.0)) throw std::invalid_argument("s and kappa must be >= 0");
  check_log_p(p);
  return 2.0 * l1_complexity(s, kappa_linf, n, p) + mcdiarmid_term(s * kappa_linf, n, delta);
}

std::size_t ceil_count(double x) {
  if (std::isnan(x)) throw std::invalid_argument("ceil_count: NaN");
  if (x <= 0.0) return 0;
  if (x >= 9.0e18) throw std::overflow_error("sample size does not fit in 64 bits");
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, x)) return static_cast<std::size_t>(r);
  return static_cast<std::size_t>(std::ceil(x));
}

namespace {

void check_oracle(double norm, double kappa, double eps1, double delta) {
  if (!(norm > 0.0)) throw std::invalid_argument("||mu_o|| must be > 0");
  if (!(kappa >= 0.0)) throw std::invalid_argument("kappa must be >= 0");
  if (!(eps1 > 0.0) || !std::isfinite(eps1)) throw std::invalid_argument("eps1 must be > 0");
  check_delta(delta);
}

}  // namespace

OracleSampleSize oracle_sample_size_l2(double mu_o_l2, double kappa_l2, double eps1, double delta) {
  check_oracle(mu_o_l2, kappa_l2, eps1, delta);
  const double sq = mu_o_l2 * mu_o_l2;
  OracleSampleSize out;
  out.lambda = 2.0 * eps1 / (3.0 * sq);
  const double base = sq * kappa_l2 * kappa_l2 * log_inv(delta);
  const double coeff = eps1 < 0.75 ? 500.0 / (eps1 * eps1 * eps1) : 650.0 / (eps1 * eps1);
  out.n = ceil_count(coeff * base);
  return out;
}

OracleSampleSize oracle_sample_size_l1(double mu_o_l1, double kappa_linf, double eps1,
                                       double delta, double p) {
  check_oracle(mu_o_l1, kappa_linf, eps1, delta);
  check_log_p(p);
  OracleSampleSize out;
  out.lambda = 2.0 * eps1 / (3.0 * mu_o_l1);
  const double c = std::sqrt(std::log(p)) + std::sqrt(log_inv(delta));
  out.n = ceil_count(135.0 * mu_o_l1 * kappa_linf * c / (eps1 * eps1));
  return out;
}

OracleSampleSize oracle_sample_size_l1_sufficient(double mu_o_l1, double kappa_linf, double eps1,
                                                  double delta, double p) {
  check_oracle(mu_o_l1, kappa_linf, eps1, delta);
  check_log_p(p);
  OracleSampleSize out;
  out.lambda = 2.0 * eps1 / (3.0 * mu_o_l1);
  const double c = std::sqrt(std::log(p)) + std::sqrt(log_inv(delta));
  const double root = 9.0 * kappa_linf * c * mu_o_l1 * (1.0 + 3.0 / (2.0 * eps1)) / eps1;
  out.n = ceil_count(root * root);
  return out;
}

GoodnessParams kernel_goodness_params(std::span<const double> mu, const KappaVector& kappa,
                                      double eps) {
  if (mu.size() != kappa.size()) throw std::invalid_argument("mu length does not match kappa");
  double dot = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu[i] < 0.0) throw std::invalid_argument("mu must be nonnegative");
    dot += mu[i] * kappa[i];
  }
  if (dot == 0.0) throw std::domain_error("<mu, kappa> = 0: the combined kernel is identically zero");
  return {eps, 1.0 / dot};
}

double gamma_certificate_l2(double lambda, double kappa_l2) {
  if (!(lambda > 0.0) || !(kappa_l2 > 0.0)) throw std::invalid_argument("lambda and kappa must be > 0");
  return std::sqrt(lambda / 2.0) / kappa_l2;
}

double gamma_certificate_l1(double lambda, double kappa_linf) {
  if (!(lambda > 0.0) || !(kappa_linf > 0.0)) throw std::invalid_argument("lambda and kappa must be > 0");
  return lambda / (2.0 * kappa_linf);
}

double gamma_common_bound_l2(double lambda, double kappa_sq, double p) {
  if (!(lambda > 0.0) || !(kappa_sq > 0.0) || !(p >= 1.0)) {
    throw std::invalid_argument("lambda, kappa^2 must be > 0 and p >= 1");
  }
  return std::sqrt(lambda / (2.0 * p)) / kappa_sq;
}

std::size_t second_stage_sample_size(double kappa, double gamma, double eps1, double delta,
                                     double constant) {
  if (!(kappa > 0.0) || !(gamma > 0.0) || !(eps1 > 0.0) || !(constant > 0.0)) {
    throw std::invalid_argument("kappa, gamma, eps1 and the constant must be > 0");
  }
  check_delta(delta);
  const double k2 = kappa * kappa;
  return ceil_count(constant * k2 * k2 * log_inv(delta) / (eps1 * eps1 * gamma * gamma));
}

BoundReport bound_report(const BoundInputs& inputs, Regularizer reg, BoundForm form) {
  validate(inputs);
  BoundReport rep;
  rep.inputs = inputs;
  rep.reg = reg;
  rep.requested_form = form;
  rep.n_even = even_part(inputs.n);
  rep.odd_n_discard = rep.n_even != inputs.n;
  rep.radius = radius_certificate(reg, inputs.lambda);
  if (rep.odd_n_discard) {
    rep.warnings.push_back("odd n: the Rademacher terms use n - 1 points (one point discarded)");
  }
  if (inputs.delta == 1.0) {
    rep.warnings.push_back("delta = 1: log(1/delta) = 0 and the confidence statement is vacuous");
  }
  if (reg == Regularizer::l2) {
    rep.rademacher = rad_bound_l2(rep.radius, inputs.kappa_l2, inputs.n);
    rep.mcdiarmid = mcdiarmid_term(rep.radius * inputs.kappa_l2, inputs.n, inputs.delta);
    rep.gen_bound_exact = gen_bound_l2(inputs, BoundForm::exact);
    rep.gen_bound_simplified = gen_bound_l2(inputs, BoundForm::simplified);
    rep.gamma_certificate = inputs.kappa_l2 > 0.0 ? gamma_certificate_l2(inputs.lambda, inputs.kappa_l2)
                                                  : std::numeric_limits<double>::infinity();
    if (inputs.r) {
      rep.uniform_dev = uniform_dev_bound_l2(*inputs.r, inputs.kappa_l2, inputs.n, inputs.delta);
    }
  } else {
    if (inputs.p < 3.0) {
      rep.warnings.push_back("p < 3: the sqrt(2 log p) complexity constant of the l1 ball is not "
                             "guaranteed here");
    }
    rep.warnings.push_back("l1 complexity uses s Kinf sqrt(2 log p / n); the strong-convexity bound with "
                           "m = n/2 and constant 1/log p gives sqrt(4 log p / n), a factor sqrt(2) larger");
    rep.rademacher = l1_complexity(rep.radius, inputs.kappa_linf, inputs.n, inputs.p);
    rep.mcdiarmid = mcdiarmid_term(rep.radius * inputs.kappa_linf, inputs.n, inputs.delta);
    rep.gen_bound_exact = gen_bound_l1(inputs, BoundForm::exact);
    rep.gen_bound_simplified = gen_bound_l1(inputs, BoundForm::simplified);
    rep.gamma_certificate = inputs.kappa_linf > 0.0
                                ? gamma_certificate_l1(inputs.lambda, inputs.kappa_linf)
                                : std::numeric_limits<double>::infinity();
    if (inputs.s) {
      rep.uniform_dev = uniform_dev_bound_l1(*inputs.s, inputs.kappa_linf, inputs.n, inputs.p,
                                             inputs.delta);
    }
  }
  rep.exact_minus_simplified = rep.gen_bound_exact - rep.gen_bound_simplified;
  rep.gen_bound = form == BoundForm::exact ? rep.gen_bound_exact : rep.gen_bound_simplified;
  return rep;
}

nlohmann::json to_json(const BoundReport& r) {
  nlohmann::json j;
  j["inputs"] = {{"n", r.inputs.n},
                 {"p", r.inputs.p},
                 {"lambda", r.inputs.lambda},
                 {"delta", r.inputs.delta},
                 {"kappa_l2", r.inputs.kappa_l2},
                 {"kappa_linf", r.inputs.kappa_linf}};
  if (r.inputs.r) j["inputs"]["r"] = *r.inputs.r;
  if (r.inputs.s) j["inputs"]["s"] = *r.inputs.s;
  j["reg"] = to_string(r.reg);
  j["form"] = to_string(r.requested_form);
  j["n_even"] = r.n_even;
  j["odd_n_discard"] = r.odd_n_discard;
  j["radius"] = r.radius;
  j["rademacher"] = r.rademacher;
  j["mcdiarmid"] = r.mcdiarmid;
  j["gen_bound_exact"] = r.gen_bound_exact;
  j["gen_bound_simplified"] = r.gen_bound_simplified;
  j["exact_minus_simplified"] = r.exact_minus_simplified;
  j["gen_bound"] = r.gen_bound;
  if (std::isfinite(r.gamma_certificate)) {
    j["gamma_certificate"] = r.gamma_certificate;
  } else {
    j["gamma_certificate"] = nullptr;
  }
  j["uniform_dev"] = r.uniform_dev ? nlohmann::json(*r.uniform_dev) : nlohmann::json(nullptr);
  j["warnings"] = r.warnings;
  return j;
}

}  // namespace kgood

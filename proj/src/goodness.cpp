#include "kgood/goodness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kgood/rng.hpp"

namespace kgood {

std::string to_string(PredictorKind kind) {
  return kind == PredictorKind::mean_embedding ? "mean-embedding" : "trained";
}

double DualPredictor::operator()(std::span<const BaseKernel> kernels, std::span<const double> x) const {
  double f = 0.0;
  for (std::size_t j = 0; j < alphas.size(); ++j) {
    if (alphas[j] == 0.0) continue;
    f += alphas[j] * combined_kernel(mu, kernels, x, support.point(j));
  }
  return f;
}

double DualPredictor::rkhs_norm(std::span<const BaseKernel> kernels) const {
  if (support.empty()) return 0.0;
  const Eigen::MatrixXd g = gram_matrix(mu, kernels, support);
  const Eigen::Map<const Eigen::VectorXd> a(alphas.data(), static_cast<Eigen::Index>(alphas.size()));
  return std::sqrt(std::max(0.0, a.dot(g * a)));
}

namespace {

void check_mu(std::span<const double> mu, std::span<const BaseKernel> kernels) {
  if (mu.size() != kernels.size()) throw std::invalid_argument("mu length does not match kernel count");
}

// Coefficients y_j w_j / m; with w_j = 1 these are bitwise the mean-embedding alphas.
std::vector<double> weighted_alphas(const LabeledDataset& ref, const std::vector<double>& w) {
  const double m = static_cast<double>(ref.size());
  std::vector<double> a(ref.size());
  for (std::size_t j = 0; j < ref.size(); ++j) a[j] = (static_cast<double>(ref.label(j)) * w[j]) / m;
  return a;
}

double mean_hinge_of(const DualPredictor& pred, const LabeledDataset& eval,
                     std::span<const BaseKernel> kernels, double scale) {
  double sum = 0.0;
  for (std::size_t i = 0; i < eval.size(); ++i) {
    const double f = pred(kernels, eval.point(i));
    sum += std::max(0.0, 1.0 - static_cast<double>(eval.label(i)) * f * scale);
  }
  return sum / static_cast<double>(eval.size());
}

}  // namespace

DualPredictor mean_embedding_predictor(std::span<const double> mu, const LabeledDataset& ref_data) {
  if (ref_data.empty()) throw std::invalid_argument("mean-embedding predictor needs reference data");
  DualPredictor pred;
  pred.alphas = weighted_alphas(ref_data, std::vector<double>(ref_data.size(), 1.0));
  pred.support = ref_data;
  pred.mu.assign(mu.begin(), mu.end());
  return pred;
}

GoodnessReport mean_embedding_goodness(std::span<const double> mu, const LabeledDataset& eval_data,
                                       const LabeledDataset& ref_data,
                                       std::span<const BaseKernel> kernels) {
  check_mu(mu, kernels);
  if (eval_data.empty()) throw std::invalid_argument("mean-embedding goodness needs evaluation data");
  const DualPredictor pred = mean_embedding_predictor(mu, ref_data);
  GoodnessReport rep;
  rep.epsilon_hat = mean_hinge_of(pred, eval_data, kernels, 1.0);
  rep.gamma = 1.0;
  rep.predictor_kind = PredictorKind::mean_embedding;
  return rep;
}

double similarity_goodness(std::span<const double> mu, const WeightFunction& weight,
                           const LabeledDataset& data, std::span<const BaseKernel> kernels) {
  check_mu(mu, kernels);
  if (data.empty()) throw std::invalid_argument("similarity goodness needs data");
  if (!weight) throw std::invalid_argument("similarity goodness needs a weight function");
  std::vector<double> w(data.size());
  for (std::size_t j = 0; j < data.size(); ++j) {
    w[j] = weight(data.point(j));
    if (!std::isfinite(w[j])) throw std::invalid_argument("weight function returned a non-finite value");
  }
  DualPredictor pred;
  pred.alphas = weighted_alphas(data, w);
  pred.support = data;
  pred.mu.assign(mu.begin(), mu.end());
  return mean_hinge_of(pred, data, kernels, 1.0);
}

DualPredictor train_second_stage(std::span<const double> mu, const LabeledDataset& train,
                                 std::span<const BaseKernel> kernels,
                                 const SecondStageOptions& options) {
  check_mu(mu, kernels);
  if (train.empty()) throw std::invalid_argument("second stage needs training data");
  double scale = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu[i] < 0.0) throw std::invalid_argument("mu must be nonnegative");
    scale += mu[i] * kernels[i].bound();
  }
  if (scale == 0.0) throw std::domain_error("degenerate kernel: <mu, kappa> = 0");
  const std::size_t n = train.size();
  const double reg = options.reg > 0.0 ? options.reg : scale * scale / static_cast<double>(n);
  const std::size_t steps = options.steps > 0 ? options.steps : 20 * n;

  const Eigen::MatrixXd g = gram_matrix(mu, kernels, train);
  std::vector<double> y(n);
  for (std::size_t j = 0; j < n; ++j) y[j] = static_cast<double>(train.label(j));
  std::vector<double> counts(n, 0.0), avg(n, 0.0);
  Rng rng(derive_seed(options.seed, 0x2d));
  const std::size_t window_start = steps / 2;
  std::size_t window = 0;
  for (std::size_t t = 1; t <= steps; ++t) {
    const auto i = static_cast<std::size_t>(uniform_index(rng, n));
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (counts[j] != 0.0) s += counts[j] * y[j] * g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    const double tt = static_cast<double>(t);
    if (y[i] * s / (reg * tt) < 1.0) counts[i] += 1.0;
    if (t > window_start) {
      const double c = 1.0 / (reg * tt);
      for (std::size_t j = 0; j < n; ++j) avg[j] += counts[j] * y[j] * c;
      ++window;
    }
  }
  DualPredictor pred;
  pred.alphas.resize(n);
  for (std::size_t j = 0; j < n; ++j) pred.alphas[j] = avg[j] / static_cast<double>(window);
  pred.support = train;
  pred.mu.assign(mu.begin(), mu.end());
  return pred;
}

double misclassification_rate(const DualPredictor& predictor, const LabeledDataset& test,
                              std::span<const BaseKernel> kernels) {
  if (test.empty()) throw std::invalid_argument("misclassification_rate: empty test set");
  std::size_t errors = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (static_cast<double>(test.label(i)) * predictor(kernels, test.point(i)) <= 0.0) ++errors;
  }
  return static_cast<double>(errors) / static_cast<double>(test.size());
}

GoodnessReport unit_norm_goodness(const DualPredictor& predictor, const LabeledDataset& eval_data,
                                  std::span<const BaseKernel> kernels, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be > 0");
  if (eval_data.empty()) throw std::invalid_argument("unit_norm_goodness: empty evaluation set");
  const double norm = predictor.rkhs_norm(kernels);
  if (!(norm > 0.0) || !std::isfinite(norm)) throw std::domain_error("predictor has zero RKHS norm");
  GoodnessReport rep;
  rep.epsilon_hat = mean_hinge_of(predictor, eval_data, kernels, 1.0 / (gamma * norm));
  rep.gamma = gamma;
  rep.predictor_kind = PredictorKind::trained;
  return rep;
}

}  // namespace kgood

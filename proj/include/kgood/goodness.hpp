#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "kgood/dataset.hpp"
#include "kgood/kernels.hpp"

namespace kgood {

enum class PredictorKind { mean_embedding, trained };

std::string to_string(PredictorKind kind);

// f(x) = sum_j alphas[j] K_mu(x, x_j) over the support points.
struct DualPredictor {
  std::vector<double> alphas;
  LabeledDataset support;
  CombinationVector mu;

  double operator()(std::span<const BaseKernel> kernels, std::span<const double> x) const;
  // sqrt(alpha^T G alpha) with G the K_mu Gram matrix of the support.
  double rkhs_norm(std::span<const BaseKernel> kernels) const;
};

struct GoodnessReport {
  double epsilon_hat = 0.0;
  double gamma = 1.0;
  PredictorKind predictor_kind = PredictorKind::mean_embedding;
};

// alphas = y_j / m over the reference set: f(x) = (1/m) sum_j y_j K_mu(x, x_j).
DualPredictor mean_embedding_predictor(std::span<const double> mu, const LabeledDataset& ref_data);

// Mean over eval_data of [1 - y f(x)]_+ for the mean-embedding predictor of
// ref_data; gamma is reported as 1 (the margin is folded into f).
GoodnessReport mean_embedding_goodness(std::span<const double> mu, const LabeledDataset& eval_data,
                                       const LabeledDataset& ref_data,
                                       std::span<const BaseKernel> kernels);

using WeightFunction = std::function<double(std::span<const double>)>;

// E_x[[1 - y E_x'[y' w(x') K_mu(x, x')]]_+] on the empirical measure of data.
double similarity_goodness(std::span<const double> mu, const WeightFunction& weight,
                           const LabeledDataset& data, std::span<const BaseKernel> kernels);

struct SecondStageOptions {
  double reg = 0.0;        // <= 0: <mu, kappa>^2 / n
  std::size_t steps = 0;   // 0: 20 n
  std::uint64_t seed = 0;
};

// Stochastic subgradient descent on (reg/2)||w||^2 + mean hinge in the RKHS of
// K_mu, kept in dual form, step 1/(reg t), averaged over the second half of
// the run. Throws std::domain_error for a degenerate kernel (<mu, kappa> = 0).
DualPredictor train_second_stage(std::span<const double> mu, const LabeledDataset& train,
                                 std::span<const BaseKernel> kernels,
                                 const SecondStageOptions& options = {});

// Fraction of points with y f(x) <= 0; throws on an empty test set.
double misclassification_rate(const DualPredictor& predictor, const LabeledDataset& test,
                              std::span<const BaseKernel> kernels);

// Mean of [1 - y f(x) / (gamma ||w||)]_+ with w the predictor scaled to unit
// RKHS norm. Throws std::domain_error for a zero-norm predictor.
GoodnessReport unit_norm_goodness(const DualPredictor& predictor, const LabeledDataset& eval_data,
                                  std::span<const BaseKernel> kernels, double gamma);

}  // namespace kgood

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kgood/dataset.hpp"
#include "kgood/kernels.hpp"
#include "kgood/risk.hpp"

namespace kgood {

enum class Regularizer { l2, l1 };
enum class StepSchedule { strongly_convex, sqrt_decay };
enum class Averaging { suffix_half, final_iterate };

std::string to_string(Regularizer reg);
Regularizer regularizer_from_string(const std::string& name);

struct SolverConfig {
  double lambda = 1.0;
  Regularizer reg = Regularizer::l2;
  std::size_t max_iters = 200'000;
  double epsilon_opt = 1e-6;
  std::uint64_t seed = 42;
  // Unset: strongly_convex for l2, sqrt_decay for l1.
  std::optional<StepSchedule> step_schedule;
  Averaging averaging = Averaging::suffix_half;
  // Active-set refinement and dual certificate at each checkpoint.
  bool polish = true;
  std::size_t minibatch_pairs = 4096;
  std::size_t max_enumerated_pairs = kMaxEnumeratedPairs;
};

struct SolveResult {
  CombinationVector mu_hat;
  double objective = 0.0;
  double empirical_risk = 0.0;
  std::size_t iterations = 0;
  // r = sqrt(2 / lambda) for l2, s = 2 / lambda for l1.
  double radius_certificate = 0.0;
  // objective minus the best dual lower bound found (>= 0).
  double gap_estimate = 0.0;
  bool converged = false;
  // Iterations used random minibatches (population above the pair threshold).
  bool stochastic = false;
  bool subsampled = false;
};

double radius_certificate(Regularizer reg, double lambda);

// (lambda/2)||mu||_2^2 + Rhat(mu) and (lambda/2)||mu||_1 + Rhat(mu).
double objective_l2(std::span<const double> mu, const LabeledDataset& data,
                    std::span<const BaseKernel> kernels, double lambda);
double objective_l1(std::span<const double> mu, const LabeledDataset& data,
                    std::span<const BaseKernel> kernels, double lambda);
double objective(const PairSet& pairs, std::span<const double> mu, double lambda, Regularizer reg);

// Average over pairs of -yy' z where yy' <mu, z> < 1; a margin of exactly one
// contributes zero.
std::vector<double> subgradient_risk(std::span<const double> mu, std::span<const KSpacePair> pairs);
std::vector<double> subgradient_risk(std::span<const double> mu, const PairSet& pairs);

std::vector<double> project_nonneg(std::span<const double> v);

// Euclidean projection onto {mu >= 0, ||mu|| <= radius} in the regularizer's norm.
std::vector<double> project_feasible(std::span<const double> v, Regularizer reg, double radius);

// Fenchel dual value for per-pair weights alpha in [0, 1]; a lower bound on
// the optimal objective for every such alpha.
double dual_value(const PairSet& pairs, std::span<const double> alpha, double lambda,
                  Regularizer reg);

// Projected subgradient descent over mu >= 0 for the chosen regularizer.
SolveResult solve(const PairSet& pairs, const SolverConfig& config);
SolveResult solve(const LabeledDataset& data, std::span<const BaseKernel> kernels,
                  const SolverConfig& config);
SolveResult solve_l2(const LabeledDataset& data, std::span<const BaseKernel> kernels,
                     SolverConfig config);
SolveResult solve_l1(const LabeledDataset& data, std::span<const BaseKernel> kernels,
                     SolverConfig config);

}  // namespace kgood

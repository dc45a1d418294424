#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "kgood/kernels.hpp"
#include "kgood/optimize.hpp"

namespace kgood {

inline constexpr int kReportFormatVersion = 1;

enum class ExperimentKind { bound_check, reverse_bound, oracle, sparsity, rademacher };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

struct PlantedConfig {
  std::size_t p = 5;
  KernelList kernels;        // empty: p linear kernels of radius 1
  CombinationVector mu_o;    // empty: weight 2 on the first coordinate
  double label_noise = 0.0;
  double target_eps = 0.0;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::bound_check;
  std::size_t trials = 100;
  std::size_t n = 200;
  double delta = 0.1;
  std::uint64_t seed = 1;     // master seed
  std::size_t threads = 1;
  SolverConfig solver;
  PlantedConfig planted;
  std::size_t mc_pairs = 100'000;
  double mc_guard = 3.0;      // violations must clear the bound by this many stderr

  // reverse-bound
  std::size_t grid_points = 50;
  double radius = 1.0;        // r for l2, s for l1

  // oracle
  double eps1 = 0.1;
  std::vector<std::size_t> n_sweep{100, 400, 1600};
  std::string lambda_rule = "theorem";  // or "oblivious": lambda = n^(-1/3)
  std::size_t desk_max_n = 20'000;
  double final_threshold = -1.0;        // < 0: target_eps + eps1

  // sparsity
  double support_threshold = 1e-3;  // relative to ||mu_hat||_1
  double lambda_l1 = 0.0;           // <= 0: use solver.lambda for both

  // rademacher
  std::size_t configs = 100;
  std::size_t m_min = 4;
  std::size_t m_max = 12;
  std::size_t p_min = 2;
  std::size_t p_max = 8;
  std::size_t inequality_instances = 1000;

  nlohmann::json raw;         // the parsed document, echoed in reports
};

ExperimentConfig experiment_config_from_json(const nlohmann::json& doc, ExperimentKind kind,
                                             const std::filesystem::path& base_dir = {});

struct ExperimentReport {
  ExperimentKind kind = ExperimentKind::bound_check;
  nlohmann::json config;
  nlohmann::json bound_report;        // null when the experiment has none
  nlohmann::json trials = nlohmann::json::array();
  nlohmann::json aggregate = nlohmann::json::object();
  std::vector<std::string> notes;
  std::size_t failed_trials = 0;
  double runtime_seconds = 0.0;

  nlohmann::json to_json() const;
};

// Wilson score interval for k successes out of n at ~95% (z = 1.96).
std::pair<double, double> wilson_interval(std::size_t k, std::size_t n, double z = 1.96);

// Draws `trials` training sets, solves, and counts trials where the Monte Carlo
// true risk exceeds Rhat(mu_hat) + exact-form bound by more than mc_guard stderr.
ExperimentReport run_bound_check(const ExperimentConfig& config);

// For a fixed grid inside B2(radius) or B1(radius), counts per grid point the
// trials where Rhat(mu) exceeds R_MC(mu) + uniform deviation bound + guard.
ExperimentReport run_reverse_bound_check(const ExperimentConfig& config);

// Sweeps n with lambda from the oracle rule (or n^(-1/3)) and records the
// per-n median of R_MC(mu_hat).
ExperimentReport run_oracle_experiment(const ExperimentConfig& config);

// Support sizes of the L1 and L2 solutions on sparse planted data.
ExperimentReport run_sparsity_comparison(const ExperimentConfig& config);

// Exhaustive Rademacher dominance plus decoupling and contraction checks on
// randomized instances.
ExperimentReport run_rademacher_experiment(const ExperimentConfig& config);

ExperimentReport run_experiment(const ExperimentConfig& config);

// The report with runtime fields removed, for reproducibility comparisons.
nlohmann::json strip_runtime(nlohmann::json report);

}  // namespace kgood

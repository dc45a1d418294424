#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "kgood/bounds.hpp"
#include "kgood/config.hpp"
#include "kgood/dataset.hpp"
#include "kgood/experiments.hpp"
#include "kgood/goodness.hpp"
#include "kgood/kernels.hpp"
#include "kgood/optimize.hpp"

using nlohmann::json;

namespace {

struct TrainArgs {
  std::string data;
  std::string kernels;
  std::string reg = "l2";
  double lambda = 1.0;
  std::uint64_t seed = 42;
  std::size_t max_iters = 200000;
  double epsilon_opt = 1e-6;
  std::string predictor = "mean-embedding";
  std::string test;
};

struct BoundsArgs {
  std::size_t n = 0;
  double p = 1.0;
  double lambda = 1.0;
  double delta = 0.1;
  double kappa_l2 = 1.0;
  double kappa_linf = 1.0;
  std::string reg = "l2";
  std::string form = "exact";
  std::optional<double> r;
  std::optional<double> s;
};

struct ExperimentArgs {
  std::string kind;
  std::string config;
  std::string out;
  std::size_t threads = 0;
};

int run_train(const TrainArgs& a) {
  const kgood::LabeledDataset train = kgood::load_dataset(a.data);
  const kgood::KernelList kernels = kgood::load_kernels(a.kernels);
  kgood::SolverConfig cfg;
  cfg.reg = kgood::regularizer_from_string(a.reg);
  cfg.lambda = a.lambda;
  cfg.seed = a.seed;
  cfg.max_iters = a.max_iters;
  cfg.epsilon_opt = a.epsilon_opt;
  const kgood::SolveResult res = kgood::solve(train, kernels, cfg);

  json out;
  out["mu_hat"] = res.mu_hat;
  out["objective"] = res.objective;
  out["empirical_risk"] = res.empirical_risk;
  out["iterations"] = res.iterations;
  out["radius_certificate"] = res.radius_certificate;
  out["gap_estimate"] = res.gap_estimate;
  out["converged"] = res.converged;
  out["subsampled"] = res.subsampled;
  out["solver"] = kgood::to_json(cfg);

  std::optional<kgood::LabeledDataset> test;
  if (!a.test.empty()) test = kgood::load_dataset(a.test);
  const kgood::LabeledDataset& eval = test ? *test : train;
  out["evaluated_on"] = test ? "test" : "train";

  const kgood::KappaVector kappa = kgood::kappa_of(kernels);
  double scale = 0.0;
  for (std::size_t i = 0; i < kappa.size(); ++i) scale += res.mu_hat[i] * kappa[i];
  std::vector<std::string> warnings;
  if (a.predictor == "mean-embedding") {
    const auto rep = kgood::mean_embedding_goodness(res.mu_hat, eval, train, kernels);
    out["goodness"] = {{"epsilon_hat", rep.epsilon_hat},
                       {"gamma", rep.gamma},
                       {"predictor_kind", kgood::to_string(rep.predictor_kind)}};
    if (scale > 0.0) out["goodness"]["kernel_gamma"] = 1.0 / scale;
    const auto pred = kgood::mean_embedding_predictor(res.mu_hat, train);
    out["misclassification"] = kgood::misclassification_rate(pred, eval, kernels);
  } else if (a.predictor == "trained") {
    if (scale == 0.0) {
      warnings.push_back("learned combination is zero; no second-stage classifier");
      out["goodness"] = nullptr;
      out["misclassification"] = 1.0;
    } else {
      kgood::SecondStageOptions opts;
      opts.seed = a.seed;
      const auto pred = kgood::train_second_stage(res.mu_hat, train, kernels, opts);
      const double gamma = 1.0 / scale;
      try {
        const auto rep = kgood::unit_norm_goodness(pred, eval, kernels, gamma);
        out["goodness"] = {{"epsilon_hat", rep.epsilon_hat},
                           {"gamma", rep.gamma},
                           {"predictor_kind", kgood::to_string(rep.predictor_kind)}};
      } catch (const std::domain_error& e) {
        warnings.push_back(e.what());
        out["goodness"] = nullptr;
      }
      out["misclassification"] = kgood::misclassification_rate(pred, eval, kernels);
    }
  } else {
    throw std::invalid_argument("--predictor must be mean-embedding or trained");
  }
  out["warnings"] = warnings;
  std::cout << out.dump(2) << '\n';
  return 0;
}

int run_bounds(const BoundsArgs& a) {
  kgood::BoundInputs in;
  in.n = a.n;
  in.p = a.p;
  in.lambda = a.lambda;
  in.delta = a.delta;
  in.kappa_l2 = a.kappa_l2;
  in.kappa_linf = a.kappa_linf;
  in.r = a.r;
  in.s = a.s;
  const auto reg = kgood::regularizer_from_string(a.reg);
  kgood::BoundForm form = kgood::BoundForm::exact;
  if (a.form == "simplified") {
    form = kgood::BoundForm::simplified;
  } else if (a.form != "exact") {
    throw std::invalid_argument("--form must be exact or simplified");
  }
  std::cout << kgood::to_json(kgood::bound_report(in, reg, form)).dump(2) << '\n';
  return 0;
}

int run_experiment(const ExperimentArgs& a) {
  const auto kind = kgood::experiment_kind_from_string(a.kind);
  const std::filesystem::path path(a.config);
  kgood::ExperimentConfig cfg =
      kgood::experiment_config_from_json(kgood::read_json_file(path), kind, path.parent_path());
  if (a.threads > 0) cfg.threads = a.threads;
  const kgood::ExperimentReport rep = kgood::run_experiment(cfg);
  const std::string text = rep.to_json().dump(2);
  if (a.out.empty()) {
    std::cout << text << '\n';
  } else {
    std::ofstream f(a.out);
    if (!f) throw std::runtime_error("cannot write " + a.out);
    f << text << '\n';
  }
  if (rep.failed_trials > 0) {
    std::cerr << rep.failed_trials << " trial(s) failed; see the report\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage multiple kernel learning: solvers, bound calculators and experiments"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Learn a kernel combination and evaluate it");
  t->add_option("--data", train.data, "Training CSV (label first)")->required()->check(CLI::ExistingFile);
  t->add_option("--kernels", train.kernels, "Kernel JSON")->required()->check(CLI::ExistingFile);
  t->add_option("--reg", train.reg, "l2 or l1")->check(CLI::IsMember({"l2", "l1"}));
  t->add_option("--lambda", train.lambda, "Regularization weight")->required();
  t->add_option("--seed", train.seed, "Solver seed");
  t->add_option("--max-iters", train.max_iters, "Iteration cap");
  t->add_option("--epsilon-opt", train.epsilon_opt, "Optimality-gap tolerance");
  t->add_option("--predictor", train.predictor, "mean-embedding or trained")
      ->check(CLI::IsMember({"mean-embedding", "trained"}));
  t->add_option("--test", train.test, "Held-out CSV")->check(CLI::ExistingFile);

  BoundsArgs bounds;
  auto* b = app.add_subcommand("bounds", "Print every bound for one configuration");
  b->add_option("--n", bounds.n, "Sample count")->required();
  b->add_option("--p", bounds.p, "Kernel count (real, log p is natural)")->required();
  b->add_option("--lambda", bounds.lambda, "Regularization weight")->required();
  b->add_option("--delta", bounds.delta, "Confidence parameter")->required();
  b->add_option("--kappa-l2", bounds.kappa_l2, "||kappa||_2")->required();
  b->add_option("--kappa-linf", bounds.kappa_linf, "||kappa||_inf")->required();
  b->add_option("--reg", bounds.reg, "l2 or l1")->check(CLI::IsMember({"l2", "l1"}));
  b->add_option("--form", bounds.form, "exact or simplified")->check(CLI::IsMember({"exact", "simplified"}));
  b->add_option("--r", bounds.r, "Fixed L2 radius for the uniform deviation bound");
  b->add_option("--s", bounds.s, "Fixed L1 radius for the uniform deviation bound");

  ExperimentArgs exp;
  auto* e = app.add_subcommand("experiment", "Run an experiment and write a JSON report");
  e->add_option("kind", exp.kind, "bound-check | reverse-bound | oracle | sparsity | rademacher")
      ->required()
      ->check(CLI::IsMember({"bound-check", "reverse-bound", "oracle", "sparsity", "rademacher"}));
  e->add_option("--config", exp.config, "Experiment JSON")->required()->check(CLI::ExistingFile);
  e->add_option("--out", exp.out, "Report path (stdout when omitted)");
  e->add_option("--threads", exp.threads, "Worker threads (overrides the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*t) return run_train(train);
    if (*b) return run_bounds(bounds);
    if (*e) return run_experiment(exp);
  } catch (const std::exception& ex) {
    std::cerr << "kgood: " << ex.what() << '\n';
    return 1;
  }
  return 1;
}

#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "kgood/config.hpp"
#include "kgood/dataset.hpp"
#include "kgood/experiments.hpp"
#include "kgood/planted.hpp"

using namespace kgood;
using nlohmann::json;

namespace {

const std::filesystem::path kData{KGOOD_TEST_DATA};

ExperimentConfig small_config(ExperimentKind kind, const json& extra = json::object()) {
  json doc = {{"trials", 4},
              {"n", 40},
              {"seed", 3},
              {"mc_pairs", 2000},
              {"planted", {{"p", 3}, {"mu_o", {2.0, 0.0, 0.0}}}},
              {"solver", {{"lambda", 1.0}, {"reg", "l2"}, {"max_iters", 2000}}}};
  doc.merge_patch(extra);
  return experiment_config_from_json(doc, kind);
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("load_dataset") {
  const auto f1 = load_dataset(kData / "f1.csv");
  CHECK(f1.size() == 3);
  CHECK(f1.dim() == 1);
  CHECK(f1.label(1) == -1);
  CHECK(f1.point(2)[0] == 0.5);
  const auto hdr = load_dataset(kData / "f1_header.csv");
  CHECK(hdr.features() == f1.features());
  CHECK(hdr.labels() == f1.labels());
  CHECK_THROWS_AS(load_dataset(kData / "missing.csv"), std::runtime_error);
}

TEST_CASE("parse_dataset_csv errors name the line") {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return parse_dataset_csv(in, "t.csv");
  };
  CHECK_THROWS_AS(parse(""), std::runtime_error);
  CHECK_THROWS_AS(parse("label,x\n"), std::runtime_error);
  try {
    parse("+1,1.0\n2,0.5\n");
    FAIL("bad label accepted");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("t.csv:2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse("+1,1.0\n-1,0.5,0.2\n"), std::runtime_error);
  CHECK_THROWS_AS(parse("+1,abc\n"), std::runtime_error);
  CHECK_THROWS_AS(parse("+1\n"), std::runtime_error);
  CHECK(parse("+1,1.0\n\n-1,2.0\n").size() == 2);
}

TEST_CASE("kernel config files") {
  const auto ks = load_kernels(kData / "kernels_f1.json");
  CHECK(ks.size() == 2);
  CHECK(ks[0].kind() == KernelKind::linear);
  CHECK(ks[1].kind() == KernelKind::rbf);
  const std::vector<double> a{1.0}, b{-1.0};
  CHECK(ks[1](a, b) == doctest::Approx(std::exp(-4.0)).epsilon(1e-15));
  CHECK_THROWS(kernels_from_json(json::parse(R"({"kernels": [{"kind": "spline"}]})")));
  const auto back = kernel_from_json(to_json(ks[1]));
  CHECK(back(a, b) == ks[1](a, b));
}

TEST_CASE("planted generator") {
  PlantedSpec spec;
  spec.kernels = {BaseKernel::linear(1.0), BaseKernel::rbf(1.0)};
  spec.mu_o = {2.0, 0.0};
  spec.n = 50;
  spec.seed = 8;
  const PlantedData pd = gen_planted(spec);
  CHECK(pd.data.size() == 50);
  CHECK(pd.data.dim() == 2);
  CHECK(pd.planted_risk.value == 0.0);
  CHECK(pd.warnings.empty());
  const double band = 1.0 / std::sqrt(2.0);
  CHECK(pd.source->band_edge() == band);
  for (std::size_t i = 0; i < pd.data.size(); ++i) {
    const double x = pd.data.point(i)[0] * pd.data.label(i);
    CHECK(x >= band);
    CHECK(x <= 1.0);
  }
  const PlantedData again = gen_planted(spec);
  CHECK(again.data.features() == pd.data.features());
  CHECK(again.data.labels() == pd.data.labels());

  PlantedSpec noisy = spec;
  noisy.label_noise = 0.5;
  noisy.target_eps = 2.0;
  CHECK(gen_planted(noisy).warnings.size() == 1);

  PlantedSpec unreachable = spec;
  unreachable.label_noise = 0.3;
  unreachable.target_eps = 0.0;
  CHECK_THROWS_AS(gen_planted(unreachable), std::runtime_error);

  PlantedSpec nonlinear = spec;
  nonlinear.mu_o = {0.0, 1.0};
  CHECK_THROWS_AS(gen_planted(nonlinear), std::runtime_error);
  PlantedSpec empty = spec;
  empty.mu_o = {0.0, 0.0};
  CHECK_THROWS_AS(gen_planted(empty), std::invalid_argument);
  PlantedSpec mismatch = spec;
  mismatch.mu_o = {1.0};
  CHECK_THROWS_AS(gen_planted(mismatch), std::invalid_argument);
}

TEST_CASE("experiment config parsing") {
  CHECK_THROWS_AS(experiment_config_from_json(json{{"trails", 3}}, ExperimentKind::bound_check), std::invalid_argument);
  CHECK_THROWS_AS(experiment_config_from_json(json{{"delta", 1.0}}, ExperimentKind::bound_check), std::invalid_argument);
  CHECK_THROWS_AS(experiment_config_from_json(json{{"delta", 0.0}}, ExperimentKind::bound_check), std::invalid_argument);
  CHECK_THROWS_AS(experiment_config_from_json(json{{"trials", 0}}, ExperimentKind::bound_check), std::invalid_argument);
  CHECK_THROWS_AS(experiment_config_from_json(json{{"kind", "oracle"}}, ExperimentKind::sparsity), std::invalid_argument);
  CHECK_THROWS_AS(experiment_kind_from_string("nope"), std::invalid_argument);
  const auto cfg = experiment_config_from_json(json{{"kind", "reverse-bound"}, {"radius", 0.5}}, ExperimentKind::reverse_bound);
  CHECK(cfg.radius == 0.5);
  CHECK(experiment_kind_from_string(to_string(ExperimentKind::rademacher)) == ExperimentKind::rademacher);
}

TEST_CASE("wilson_interval") {
  const auto [lo, hi] = wilson_interval(0, 100);
  CHECK(lo == 0.0);
  CHECK(hi > 0.0);
  CHECK(hi < 0.05);
  const auto [a, b] = wilson_interval(50, 100);
  CHECK(a < 0.5);
  CHECK(b > 0.5);
  CHECK(std::abs((0.5 - a) - (b - 0.5)) < 1e-12);
}

TEST_CASE("bound check reports") {
  const auto cfg = small_config(ExperimentKind::bound_check);
  const auto rep = run_bound_check(cfg);
  const json j = rep.to_json();
  CHECK(j.at("format_version") == kReportFormatVersion);
  CHECK(j.at("bound_report").at("gen_bound_exact").get<double>() > 0.0);
  const auto& agg = j.at("aggregate");
  const auto violations = agg.at("violations").get<std::size_t>();
  const auto completed = agg.at("trials_completed").get<std::size_t>();
  CHECK(completed == 4);
  CHECK(agg.at("violation_rate").get<double>() ==
        static_cast<double>(violations) / static_cast<double>(completed));

  const auto huge = small_config(ExperimentKind::bound_check, {{"solver", {{"lambda", 1e9}}}});
  CHECK(run_bound_check(huge).aggregate.at("violations") == 0);

  const auto one = small_config(ExperimentKind::bound_check, {{"trials", 1}});
  CHECK(strip_runtime(run_bound_check(one).to_json()) == strip_runtime(run_bound_check(one).to_json()));
}

TEST_CASE("reverse bound check") {
  const auto zero = small_config(ExperimentKind::reverse_bound, {{"radius", 0.0}, {"grid_points", 5}});
  const auto rz = run_reverse_bound_check(zero);
  CHECK(rz.aggregate.at("total_violations") == 0);

  const auto cfg = small_config(ExperimentKind::reverse_bound, {{"grid_points", 8}});
  const auto rep = run_reverse_bound_check(cfg);
  const auto& grid = rep.aggregate.at("grid");
  CHECK(grid.size() == 8);
  // the origin has R = Rhat = 1 in every trial
  CHECK(grid.at(0).at("violations") == 0);
  CHECK(grid.at(0).at("r_mc").get<double>() == 1.0);
}

TEST_CASE("oracle experiment") {
  const auto cfg = small_config(ExperimentKind::oracle, {{"n_sweep", {20, 40}}, {"trials", 2}, {"desk_max_n", 100}});
  const auto rep = run_oracle_experiment(cfg);
  CHECK(rep.aggregate.at("mode") == "trend");
  bool noted = false;
  for (const auto& note : rep.notes) noted = noted || note.find("infeasible; running trend mode") != std::string::npos;
  CHECK(noted);
  CHECK(rep.aggregate.at("medians").size() == 2);
  CHECK(rep.aggregate.at("oracle_rule").at("n_required").get<std::size_t>() > 100);
}

TEST_CASE("sparsity comparison") {
  const auto tie = small_config(ExperimentKind::sparsity, {{"planted", {{"p", 1}, {"mu_o", {2.0}}}}, {"trials", 2}});
  const auto rt = run_sparsity_comparison(tie);
  CHECK(rt.aggregate.at("win_rate").get<double>() == 1.0);
  for (const auto& rec : rt.trials) CHECK(rec.at("support_l1") == rec.at("support_l2"));

  const auto flat = small_config(ExperimentKind::sparsity, {{"solver", {{"lambda", 1e9}}}, {"trials", 2}});
  const auto rf = run_sparsity_comparison(flat);
  CHECK(rf.aggregate.at("mean_support_l1").get<double>() == 0.0);
  // the l2 solution shrinks like 1/lambda but keeps its relative support
  for (const auto& rec : rf.trials) {
    double norm = 0.0;
    for (double v : rec.at("mu_l2")) norm += v * v;
    CHECK(std::sqrt(norm) <= 1e-8);
  }
}

TEST_CASE("rademacher experiment") {
  const auto cfg = experiment_config_from_json(
      json{{"configs", 5}, {"inequality_instances", 10}, {"m_max", 8}, {"seed", 4}}, ExperimentKind::rademacher);
  const auto rep = run_rademacher_experiment(cfg);
  CHECK(rep.aggregate.at("l2_violations") == 0);
  CHECK(rep.aggregate.at("l1_violations") == 0);
  CHECK(rep.aggregate.at("decoupling_violations") == 0);
  CHECK(rep.aggregate.at("contraction_violations") == 0);
}

TEST_CASE("reports do not depend on the thread count") {
  for (auto kind : {ExperimentKind::bound_check, ExperimentKind::reverse_bound, ExperimentKind::sparsity}) {
    auto a = small_config(kind, {{"grid_points", 4}});
    auto b = a;
    a.threads = 1;
    b.threads = 4;
    json ja = strip_runtime(run_experiment(a).to_json());
    json jb = strip_runtime(run_experiment(b).to_json());
    ja["config"].erase("threads");
    jb["config"].erase("threads");
    CHECK(ja == jb);
  }
}

}

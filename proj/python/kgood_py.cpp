#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kgood/bounds.hpp"
#include "kgood/config.hpp"
#include "kgood/experiments.hpp"
#include "kgood/goodness.hpp"
#include "kgood/kernels.hpp"
#include "kgood/optimize.hpp"
#include "kgood/rademacher.hpp"
#include "kgood/risk.hpp"

namespace py = pybind11;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace {

py::object to_python(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

nlohmann::json from_python(const py::object& obj) {
  const std::string text = py::str(py::module_::import("json").attr("dumps")(obj));
  return nlohmann::json::parse(text);
}

kgood::LabeledDataset make_dataset(const Eigen::Ref<const RowMatrix>& x, const std::vector<int>& y) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw std::invalid_argument("X has " + std::to_string(x.rows()) + " rows but y has " +
                                std::to_string(y.size()) + " labels");
  }
  kgood::LabeledDataset data(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    data.push_back(std::span<const double>(x.row(i).data(), static_cast<std::size_t>(x.cols())),
                   y[static_cast<std::size_t>(i)]);
  }
  return data;
}

py::dict solve_result_dict(const kgood::SolveResult& r) {
  py::dict d;
  d["mu_hat"] = r.mu_hat;
  d["objective"] = r.objective;
  d["empirical_risk"] = r.empirical_risk;
  d["iterations"] = r.iterations;
  d["radius_certificate"] = r.radius_certificate;
  d["gap_estimate"] = r.gap_estimate;
  d["converged"] = r.converged;
  d["stochastic"] = r.stochastic;
  d["subsampled"] = r.subsampled;
  return d;
}

}  // namespace

PYBIND11_MODULE(kgood, m) {
  m.doc() = "Two-stage multiple kernel learning: pairwise hinge risk, solvers and bounds";

  py::class_<kgood::BaseKernel>(m, "Kernel")
      .def_static("linear", &kgood::BaseKernel::linear, py::arg("domain_radius") = 1.0)
      .def_static("rbf", &kgood::BaseKernel::rbf, py::arg("width"), py::arg("bound") = 1.0)
      .def_static("polynomial", &kgood::BaseKernel::polynomial, py::arg("degree"), py::arg("offset"),
                  py::arg("domain_radius") = 1.0)
      .def_static("from_json", [](const py::object& entry) {
        return kgood::kernel_from_json(from_python(entry));
      })
      .def("with_bound", &kgood::BaseKernel::with_bound)
      .def("on_features", &kgood::BaseKernel::on_features)
      .def_property_readonly("bound", &kgood::BaseKernel::bound)
      .def_property_readonly("kind", [](const kgood::BaseKernel& k) { return kgood::to_string(k.kind()); })
      .def("__call__", [](const kgood::BaseKernel& k, const std::vector<double>& x,
                          const std::vector<double>& x2) { return k(x, x2); });

  m.def("kspace_map", [](const std::vector<kgood::BaseKernel>& kernels, const std::vector<double>& x,
                         int y, const std::vector<double>& x2, int y2) {
    const auto pair = kgood::kspace_map(kernels, x, y, x2, y2);
    return py::make_tuple(pair.z, pair.label_product);
  });
  m.def("kappa_norms", [](const std::vector<double>& kappa) {
    const auto n = kgood::kappa_norms(kgood::KappaVector(kappa));
    return py::make_tuple(n.l2, n.linf);
  });
  m.def("gram_matrix", [](const std::vector<double>& mu, const std::vector<kgood::BaseKernel>& kernels,
                          const Eigen::Ref<const RowMatrix>& x) {
    return kgood::gram_matrix(mu, kernels, make_dataset(x, std::vector<int>(static_cast<std::size_t>(x.rows()), 1)));
  });

  m.def("empirical_risk", [](const std::vector<double>& mu, const Eigen::Ref<const RowMatrix>& x,
                             const std::vector<int>& y, const std::vector<kgood::BaseKernel>& kernels) {
    return kgood::empirical_risk(mu, make_dataset(x, y), kernels);
  }, py::arg("mu"), py::arg("X"), py::arg("y"), py::arg("kernels"));
  m.def("empirical_risk_with_diagonal",
        [](const std::vector<double>& mu, const Eigen::Ref<const RowMatrix>& x, const std::vector<int>& y,
           const std::vector<kgood::BaseKernel>& kernels, bool plain_average) {
          return kgood::empirical_risk_with_diagonal(
              mu, make_dataset(x, y), kernels,
              plain_average ? kgood::DiagonalWeight::plain_average : kgood::DiagonalWeight::footnote);
        },
        py::arg("mu"), py::arg("X"), py::arg("y"), py::arg("kernels"), py::arg("plain_average") = false);
  m.def("ordered_pair_risk", [](const std::vector<double>& mu, const Eigen::Ref<const RowMatrix>& x,
                                const std::vector<int>& y, const std::vector<kgood::BaseKernel>& kernels) {
    return kgood::ordered_pair_risk(mu, make_dataset(x, y), kernels);
  }, py::arg("mu"), py::arg("X"), py::arg("y"), py::arg("kernels"));

  m.def("solve",
        [](const Eigen::Ref<const RowMatrix>& x, const std::vector<int>& y,
           const std::vector<kgood::BaseKernel>& kernels, double lambda, const std::string& reg,
           std::size_t max_iters, double epsilon_opt, std::uint64_t seed) {
          kgood::SolverConfig cfg;
          cfg.lambda = lambda;
          cfg.reg = kgood::regularizer_from_string(reg);
          cfg.max_iters = max_iters;
          cfg.epsilon_opt = epsilon_opt;
          cfg.seed = seed;
          const auto data = make_dataset(x, y);
          kgood::SolveResult r;
          {
            py::gil_scoped_release release;
            r = kgood::solve(data, kernels, cfg);
          }
          return solve_result_dict(r);
        },
        py::arg("X"), py::arg("y"), py::arg("kernels"), py::arg("lambda_"), py::arg("reg") = "l2",
        py::arg("max_iters") = 200000, py::arg("epsilon_opt") = 1e-6, py::arg("seed") = 42);

  m.def("mean_embedding_goodness",
        [](const std::vector<double>& mu, const Eigen::Ref<const RowMatrix>& x, const std::vector<int>& y,
           const std::vector<kgood::BaseKernel>& kernels) {
          const auto data = make_dataset(x, y);
          return kgood::mean_embedding_goodness(mu, data, data, kernels).epsilon_hat;
        },
        py::arg("mu"), py::arg("X"), py::arg("y"), py::arg("kernels"));
  m.def("second_stage_error",
        [](const std::vector<double>& mu, const Eigen::Ref<const RowMatrix>& x_train,
           const std::vector<int>& y_train, const Eigen::Ref<const RowMatrix>& x_test,
           const std::vector<int>& y_test, const std::vector<kgood::BaseKernel>& kernels, std::uint64_t seed) {
          kgood::SecondStageOptions opts;
          opts.seed = seed;
          const auto pred = kgood::train_second_stage(mu, make_dataset(x_train, y_train), kernels, opts);
          return kgood::misclassification_rate(pred, make_dataset(x_test, y_test), kernels);
        },
        py::arg("mu"), py::arg("X_train"), py::arg("y_train"), py::arg("X_test"), py::arg("y_test"),
        py::arg("kernels"), py::arg("seed") = 0);

  m.def("bound_report",
        [](std::size_t n, double p, double lambda, double delta, double kappa_l2, double kappa_linf,
           const std::string& reg, const std::string& form) {
          kgood::BoundInputs in;
          in.n = n;
          in.p = p;
          in.lambda = lambda;
          in.delta = delta;
          in.kappa_l2 = kappa_l2;
          in.kappa_linf = kappa_linf;
          const auto f = form == "simplified" ? kgood::BoundForm::simplified : kgood::BoundForm::exact;
          return to_python(kgood::to_json(kgood::bound_report(in, kgood::regularizer_from_string(reg), f)));
        },
        py::arg("n"), py::arg("p"), py::arg("lambda_"), py::arg("delta"), py::arg("kappa_l2"),
        py::arg("kappa_linf"), py::arg("reg") = "l2", py::arg("form") = "exact");
  m.def("rad_bound_l2", &kgood::rad_bound_l2, py::arg("r"), py::arg("kappa_l2"), py::arg("n"));
  m.def("rad_bound_l1", &kgood::rad_bound_l1, py::arg("s"), py::arg("kappa_linf"), py::arg("n"), py::arg("p"));
  m.def("oracle_sample_size_l2", [](double mu, double kappa, double eps1, double delta) {
    const auto r = kgood::oracle_sample_size_l2(mu, kappa, eps1, delta);
    return py::make_tuple(r.n, r.lambda);
  });
  m.def("oracle_sample_size_l1", [](double mu, double kappa, double eps1, double delta, double p) {
    const auto r = kgood::oracle_sample_size_l1(mu, kappa, eps1, delta, p);
    return py::make_tuple(r.n, r.lambda);
  });
  m.def("second_stage_sample_size", &kgood::second_stage_sample_size, py::arg("kappa"), py::arg("gamma"),
        py::arg("eps1"), py::arg("delta"), py::arg("constant") = 1.0);

  m.def("empirical_rademacher",
        [](const Eigen::MatrixXd& z, const std::string& ball, double radius, bool nonneg) {
          kgood::Ball b{ball == "l1" ? kgood::BallKind::l1 : kgood::BallKind::l2, radius, nonneg};
          return kgood::empirical_rademacher(z, b, {}).value;
        },
        py::arg("z"), py::arg("ball") = "l2", py::arg("radius") = 1.0, py::arg("nonneg") = false);

  m.def("run_experiment",
        [](const std::string& kind, const py::object& config) {
          const auto cfg = kgood::experiment_config_from_json(from_python(config),
                                                              kgood::experiment_kind_from_string(kind));
          nlohmann::json report;
          {
            py::gil_scoped_release release;
            report = kgood::run_experiment(cfg).to_json();
          }
          return to_python(report);
        },
        py::arg("kind"), py::arg("config"));

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const std::domain_error& e) {
      PyErr_SetString(PyExc_ArithmeticError, e.what());
    }
  });
}

#include "kgood/config.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace kgood {

namespace {

using nlohmann::json;

double number(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw std::invalid_argument(std::string("'") + key + "' must be a number");
  return j.at(key).get<double>();
}

}  // namespace

BaseKernel kernel_from_json(const json& entry, const std::filesystem::path& base_dir) {
  if (!entry.is_object()) throw std::invalid_argument("kernel entry must be a JSON object");
  if (!entry.contains("kind")) throw std::invalid_argument("kernel entry needs a \"kind\"");
  const std::string kind = entry.at("kind").get<std::string>();
  BaseKernel k = BaseKernel::linear();
  if (kind == "linear") {
    k = BaseKernel::linear(number(entry, "domain_radius", 1.0));
  } else if (kind == "rbf") {
    k = BaseKernel::rbf(number(entry, "width", 1.0), number(entry, "bound", 1.0));
  } else if (kind == "poly" || kind == "polynomial") {
    const double degree = number(entry, "degree", 2.0);
    if (degree != std::floor(degree)) throw std::invalid_argument("poly degree must be an integer");
    k = BaseKernel::polynomial(static_cast<int>(degree), number(entry, "offset", 1.0),
                               number(entry, "domain_radius", 1.0));
  } else if (kind == "table") {
    if (!entry.contains("path")) throw std::invalid_argument("table kernel needs a \"path\"");
    if (!entry.contains("bound")) throw std::invalid_argument("table kernel needs an explicit \"bound\"");
    std::filesystem::path path = entry.at("path").get<std::string>();
    if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
    const double bound = number(entry, "bound", 0.0);
    k = BaseKernel::table(load_kernel_table(path, bound), bound);
  } else {
    throw std::invalid_argument("unknown kernel kind '" + kind + "'");
  }
  if (entry.contains("bound") && kind != "rbf" && kind != "table") {
    k = k.with_bound(number(entry, "bound", k.bound()));
  }
  if (entry.contains("features")) {
    k = k.on_features(entry.at("features").get<std::vector<std::size_t>>());
  }
  return k;
}

KernelList kernels_from_json(const json& doc, const std::filesystem::path& base_dir) {
  const json* list = &doc;
  if (doc.is_object()) {
    if (!doc.contains("kernels")) throw std::invalid_argument("expected a \"kernels\" array");
    list = &doc.at("kernels");
  }
  if (!list->is_array() || list->empty()) throw std::invalid_argument("kernel list must be a nonempty array");
  KernelList out;
  for (const auto& entry : *list) out.push_back(kernel_from_json(entry, base_dir));
  return out;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

KernelList load_kernels(const std::filesystem::path& path) {
  return kernels_from_json(read_json_file(path), path.parent_path());
}

json to_json(const BaseKernel& k) {
  json j;
  j["kind"] = to_string(k.kind());
  switch (k.kind()) {
    case KernelKind::linear: j["domain_radius"] = k.domain_radius(); break;
    case KernelKind::rbf: j["width"] = k.width(); break;
    case KernelKind::polynomial:
      j["degree"] = k.degree();
      j["offset"] = k.offset();
      j["domain_radius"] = k.domain_radius();
      break;
    case KernelKind::table: j["table_size"] = k.table_data()->size; break;
  }
  j["bound"] = k.bound();
  if (!k.features().empty()) j["features"] = k.features();
  return j;
}

SolverConfig solver_from_json(const json& doc, SolverConfig cfg) {
  if (doc.is_null()) return cfg;
  if (!doc.is_object()) throw std::invalid_argument("solver options must be a JSON object");
  cfg.lambda = number(doc, "lambda", cfg.lambda);
  if (doc.contains("reg")) cfg.reg = regularizer_from_string(doc.at("reg").get<std::string>());
  if (doc.contains("max_iters")) cfg.max_iters = doc.at("max_iters").get<std::size_t>();
  cfg.epsilon_opt = number(doc, "epsilon_opt", cfg.epsilon_opt);
  if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
  if (doc.contains("step_schedule")) {
    const auto s = doc.at("step_schedule").get<std::string>();
    if (s == "strongly-convex") {
      cfg.step_schedule = StepSchedule::strongly_convex;
    } else if (s == "sqrt-decay") {
      cfg.step_schedule = StepSchedule::sqrt_decay;
    } else {
      throw std::invalid_argument("unknown step_schedule '" + s + "'");
    }
  }
  if (doc.contains("averaging")) {
    const auto a = doc.at("averaging").get<std::string>();
    if (a == "suffix-half") {
      cfg.averaging = Averaging::suffix_half;
    } else if (a == "final-iterate") {
      cfg.averaging = Averaging::final_iterate;
    } else {
      throw std::invalid_argument("unknown averaging '" + a + "'");
    }
  }
  if (doc.contains("polish")) cfg.polish = doc.at("polish").get<bool>();
  if (doc.contains("minibatch_pairs")) cfg.minibatch_pairs = doc.at("minibatch_pairs").get<std::size_t>();
  if (!(cfg.lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
  if (!(cfg.epsilon_opt > 0.0)) throw std::invalid_argument("epsilon_opt must be > 0");
  if (cfg.max_iters == 0) throw std::invalid_argument("max_iters must be >= 1");
  return cfg;
}

json to_json(const SolverConfig& cfg) {
  json j;
  j["lambda"] = cfg.lambda;
  j["reg"] = to_string(cfg.reg);
  j["max_iters"] = cfg.max_iters;
  j["epsilon_opt"] = cfg.epsilon_opt;
  j["seed"] = cfg.seed;
  const auto schedule = cfg.step_schedule.value_or(
      cfg.reg == Regularizer::l2 ? StepSchedule::strongly_convex : StepSchedule::sqrt_decay);
  j["step_schedule"] = schedule == StepSchedule::strongly_convex ? "strongly-convex" : "sqrt-decay";
  j["averaging"] = cfg.averaging == Averaging::suffix_half ? "suffix-half" : "final-iterate";
  j["polish"] = cfg.polish;
  j["minibatch_pairs"] = cfg.minibatch_pairs;
  return j;
}

}  // namespace kgood

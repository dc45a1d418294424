#pragma once

#include <filesystem>

#include "json.hpp"

#include "kgood/kernels.hpp"
#include "kgood/optimize.hpp"

namespace kgood {

// Kernel entries:
//   {"kind":"rbf","width":1.0,"bound":1.0}
//   {"kind":"linear","domain_radius":1.0}
//   {"kind":"poly","degree":2,"offset":1.0,"domain_radius":1.0}
//   {"kind":"table","path":"k1.csv","bound":2.5}
// Optional on every kind: "bound" (declared kappa^2) and "features" (list of
// coordinate indices the kernel reads). Table paths resolve against base_dir.
BaseKernel kernel_from_json(const nlohmann::json& entry, const std::filesystem::path& base_dir = {});

// Accepts a JSON array of entries or an object with a "kernels" array.
KernelList kernels_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
KernelList load_kernels(const std::filesystem::path& path);

nlohmann::json to_json(const BaseKernel& kernel);

// {"lambda":0.5,"reg":"l2","max_iters":200000,"epsilon_opt":1e-6,"seed":42}
// plus optional "step_schedule" ("strongly-convex" | "sqrt-decay"),
// "averaging" ("suffix-half" | "final-iterate") and "polish".
SolverConfig solver_from_json(const nlohmann::json& doc, SolverConfig defaults = {});
nlohmann::json to_json(const SolverConfig& config);

nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace kgood

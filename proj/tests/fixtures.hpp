#pragma once

#include <cstdint>
#include <vector>

#include "kgood/dataset.hpp"
#include "kgood/kernels.hpp"
#include "kgood/rng.hpp"
#include "oracles.hpp"

namespace fixture {

// F1: scalars {(1,+1), (-1,-1), (0.5,+1)} with [linear (bound 1), rbf width 1].
inline kgood::LabeledDataset f1_data() {
  return kgood::LabeledDataset(1, {1.0, -1.0, 0.5}, {1, -1, 1});
}

inline kgood::KernelList f1_kernels() {
  return {kgood::BaseKernel::linear(1.0), kgood::BaseKernel::rbf(1.0, 1.0)};
}

inline oracle::Problem f1_oracle() {
  oracle::Problem pr;
  pr.x = {{1.0}, {-1.0}, {0.5}};
  pr.y = {1, -1, 1};
  pr.kernels = {{oracle::Kernel::linear}, {oracle::Kernel::rbf, 1.0}};
  return pr;
}

// A random problem mirrored in library and oracle form. Points lie in the unit
// cube [-1, 1]^d scaled by 1/sqrt(d) so the linear kernels have radius 1.
struct RandomProblem {
  kgood::LabeledDataset data;
  kgood::KernelList kernels;
  oracle::Problem oracle;
};

inline RandomProblem random_problem(kgood::Rng& rng, std::size_t n, std::size_t p, std::size_t dim) {
  RandomProblem rp;
  rp.data = kgood::LabeledDataset(dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  std::vector<double> w(dim);
  for (double& v : w) v = kgood::uniform(rng, -1.0, 1.0);
  const double flip = kgood::uniform(rng, 0.0, 0.3);
  std::vector<double> x(dim);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      x[d] = scale * kgood::uniform(rng, -1.0, 1.0);
      s += w[d] * x[d];
    }
    int y = s >= 0.0 ? 1 : -1;
    if (kgood::uniform01(rng) < flip) y = -y;
    rp.data.push_back(x, y);
    rp.oracle.x.push_back(x);
    rp.oracle.y.push_back(y);
  }
  for (std::size_t k = 0; k < p; ++k) {
    switch (kgood::uniform_index(rng, 3)) {
      case 0:
        rp.kernels.push_back(kgood::BaseKernel::linear(1.0));
        rp.oracle.kernels.push_back({oracle::Kernel::linear});
        break;
      case 1: {
        const double width = kgood::uniform(rng, 0.3, 2.0);
        rp.kernels.push_back(kgood::BaseKernel::rbf(width));
        rp.oracle.kernels.push_back({oracle::Kernel::rbf, width});
        break;
      }
      default: {
        const int degree = 2 + static_cast<int>(kgood::uniform_index(rng, 2));
        rp.kernels.push_back(kgood::BaseKernel::polynomial(degree, 1.0, 1.0));
        rp.oracle.kernels.push_back({oracle::Kernel::poly, 1.0, degree, 1.0});
        break;
      }
    }
  }
  return rp;
}

inline std::vector<double> random_nonneg(kgood::Rng& rng, std::size_t p, double hi) {
  std::vector<double> mu(p);
  for (double& v : mu) v = kgood::uniform(rng, 0.0, hi);
  return mu;
}

}  // namespace fixture

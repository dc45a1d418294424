#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "kgood/dataset.hpp"
#include "kgood/kernels.hpp"
#include "kgood/risk.hpp"

namespace kgood {

// A generative model with a planted good combination mu_o.
//
// Points live in R^p and kernel i reads coordinate i only. Labels are uniform
// in {-1, +1}. A relevant coordinate (mu_o[i] > 0) is y u with u uniform on
// [m, 1]; every other coordinate is uniform on [-1, 1]. The band edge
// m = min(1, 1 / sqrt(sum of relevant mu_o)) makes yy' <mu_o, z> >= 1 for every
// pair of clean points, so mu_o has zero risk before label noise. Labels are
// then flipped independently with probability label_noise.
struct PlantedSpec {
  KernelList kernels;          // relevant kernels must be linear
  CombinationVector mu_o;
  double target_eps = 0.0;
  double label_noise = 0.0;    // in [0, 0.5]
  std::size_t n = 100;
  std::uint64_t seed = 0;
  std::size_t check_pairs = 10'000;
  std::size_t check_rounds = 3;
};

class PlantedSource final : public PointSource {
 public:
  PlantedSource(CombinationVector mu_o, double band_edge, double label_noise);
  std::size_t dim() const override { return mu_o_.size(); }
  int draw(Rng& rng, std::span<double> x) const override;

  double band_edge() const noexcept { return band_edge_; }
  const CombinationVector& mu_o() const noexcept { return mu_o_; }

 private:
  CombinationVector mu_o_;
  double band_edge_;
  double label_noise_;
};

struct PlantedData {
  LabeledDataset data;
  std::shared_ptr<const PlantedSource> source;
  KernelList kernels;          // PlantedSpec::kernels restricted to their coordinates
  RiskEstimate planted_risk;   // Monte Carlo risk of mu_o from the check
  std::vector<std::string> warnings;
};

// Builds the source and draws spec.n points. Throws std::runtime_error when
// the Monte Carlo risk of mu_o exceeds target_eps + 3 stderr in every check
// round, or when a relevant kernel is not linear.
PlantedData gen_planted(const PlantedSpec& spec);

// Draws n points from a source with the given seed.
LabeledDataset draw_dataset(const PointSource& source, std::size_t n, std::uint64_t seed);

}  // namespace kgood

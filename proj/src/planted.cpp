#include "kgood/planted.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace kgood {

PlantedSource::PlantedSource(CombinationVector mu_o, double band_edge, double label_noise)
    : mu_o_(std::move(mu_o)), band_edge_(band_edge), label_noise_(label_noise) {
  if (mu_o_.empty()) throw std::invalid_argument("planted source needs mu_o");
  if (!(band_edge_ >= 0.0 && band_edge_ <= 1.0)) throw std::invalid_argument("band edge must lie in [0, 1]");
  if (!(label_noise_ >= 0.0 && label_noise_ <= 0.5)) throw std::invalid_argument("label_noise must lie in [0, 0.5]");
}

int PlantedSource::draw(Rng& rng, std::span<double> x) const {
  const int y = uniform_index(rng, 2) == 0 ? 1 : -1;
  for (std::size_t i = 0; i < mu_o_.size(); ++i) {
    if (mu_o_[i] > 0.0) {
      x[i] = static_cast<double>(y) * uniform(rng, band_edge_, 1.0);
    } else {
      x[i] = uniform(rng, -1.0, 1.0);
    }
  }
  const double flip = uniform01(rng);
  return flip < label_noise_ ? -y : y;
}

LabeledDataset draw_dataset(const PointSource& source, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  LabeledDataset data(source.dim());
  std::vector<double> x(source.dim());
  for (std::size_t i = 0; i < n; ++i) {
    const int y = source.draw(rng, x);
    data.push_back(x, y);
  }
  return data;
}

PlantedData gen_planted(const PlantedSpec& spec) {
  const std::size_t p = spec.mu_o.size();
  if (p == 0) throw std::invalid_argument("planted spec needs a nonempty mu_o");
  if (spec.kernels.size() != p) throw std::invalid_argument("planted spec: one kernel per mu_o entry");
  if (spec.n < 2) throw std::invalid_argument("planted spec: n must be >= 2");
  if (!(spec.target_eps >= 0.0)) throw std::invalid_argument("planted spec: target_eps must be >= 0");
  if (spec.check_pairs == 0 || spec.check_rounds == 0) {
    throw std::invalid_argument("planted spec: check_pairs and check_rounds must be >= 1");
  }
  double relevant_mass = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    if (!(spec.mu_o[i] >= 0.0)) throw std::invalid_argument("planted mu_o must be nonnegative");
    const auto& k = spec.kernels[i];
    if (spec.mu_o[i] > 0.0) {
      relevant_mass += spec.mu_o[i];
      if (k.kind() != KernelKind::linear) {
        throw std::runtime_error("planted kernel " + std::to_string(i) +
                                 " carries weight in mu_o but is not linear");
      }
    }
    if ((k.kind() == KernelKind::linear || k.kind() == KernelKind::polynomial) && k.domain_radius() < 1.0) {
      throw std::invalid_argument("planted coordinates lie in [-1, 1]; kernel " + std::to_string(i) +
                                  " declares domain_radius < 1");
    }
    if (k.kind() == KernelKind::table) throw std::invalid_argument("planted data cannot use table kernels");
  }
  if (relevant_mass == 0.0) throw std::invalid_argument("planted mu_o must have a positive entry");

  PlantedData out;
  if (spec.label_noise >= 0.5) {
    out.warnings.push_back("label_noise = 0.5: labels are independent of the points");
  }
  const double band = std::min(1.0, 1.0 / std::sqrt(relevant_mass));
  out.source = std::make_shared<PlantedSource>(spec.mu_o, band, spec.label_noise);
  out.kernels.reserve(p);
  for (std::size_t i = 0; i < p; ++i) out.kernels.push_back(spec.kernels[i].on_features({i}));

  bool ok = false;
  for (std::size_t round = 0; round < spec.check_rounds && !ok; ++round) {
    PairSampler sampler{out.source, derive_seed(spec.seed, 2, round)};
    out.planted_risk = true_risk_mc(spec.mu_o, sampler, out.kernels, spec.check_pairs);
    ok = out.planted_risk.value <= spec.target_eps + 3.0 * out.planted_risk.std_error;
  }
  if (!ok) {
    std::ostringstream msg;
    msg << "planted geometry cannot meet target_eps = " << spec.target_eps
        << " (risk of mu_o estimated at " << out.planted_risk.value << " +- "
        << out.planted_risk.std_error << " after " << spec.check_rounds << " rounds)";
    throw std::runtime_error(msg.str());
  }
  out.data = draw_dataset(*out.source, spec.n, derive_seed(spec.seed, 1));
  return out;
}

}  // namespace kgood

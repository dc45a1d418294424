#include "kgood/risk.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace kgood {

double pair_hinge(std::span<const double> mu, const KSpacePair& pair) {
  if (mu.size() != pair.z.size()) throw std::invalid_argument("pair_hinge: length mismatch");
  return std::max(0.0, 1.0 - pair.label_product * inner(mu, pair.z));
}

std::vector<std::size_t> canonical_order(const LabeledDataset& data) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto pa = data.point(a);
    const auto pb = data.point(b);
    for (std::size_t d = 0; d < pa.size(); ++d) {
      if (pa[d] < pb[d]) return true;
      if (pb[d] < pa[d]) return false;
    }
    return data.label(a) < data.label(b);
  });
  return order;
}

std::pair<std::size_t, std::size_t> pair_from_index(std::size_t index, std::size_t n) {
  // Row i starts at i n - i (i + 1) / 2.
  auto start = [n](std::size_t i) { return i * n - i * (i + 1) / 2; };
  const double nn = static_cast<double>(n);
  const double disc = (2.0 * nn - 1.0) * (2.0 * nn - 1.0) - 8.0 * static_cast<double>(index);
  auto i = static_cast<std::size_t>(std::max(0.0, std::floor(((2.0 * nn - 1.0) - std::sqrt(std::max(0.0, disc))) / 2.0)));
  while (i > 0 && start(i) > index) --i;
  while (i + 1 < n && start(i + 1) <= index) ++i;
  const std::size_t j = i + 1 + (index - start(i));
  return {i, j};
}

namespace {

void append_pair(std::vector<double>& rows, std::span<const BaseKernel> kernels,
                 const LabeledDataset& data, std::size_t a, std::size_t b) {
  const std::size_t p = kernels.size();
  const std::size_t offset = rows.size();
  rows.resize(offset + p);
  std::span<double> out(rows.data() + offset, p);
  kspace_features(kernels, data.point(a), data.point(b), out);
  const double yy = static_cast<double>(data.label(a) * data.label(b));
  for (double& v : out) v *= yy;
}

// Floyd's algorithm: a uniform random subset of {0..population-1}, sorted.
std::vector<std::size_t> sample_without_replacement(std::size_t population, std::size_t count,
                                                    std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x5a3b));
  std::unordered_set<std::size_t> chosen;
  chosen.reserve(count * 2);
  for (std::size_t j = population - count; j < population; ++j) {
    const auto t = static_cast<std::size_t>(uniform_index(rng, j + 1));
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  std::vector<std::size_t> out(chosen.begin(), chosen.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

PairSet PairSet::enumerate(const LabeledDataset& data, std::span<const BaseKernel> kernels,
                           const PairOptions& options) {
  const std::size_t n = data.size();
  if (n < 2) throw std::invalid_argument("pairwise risk needs at least two points");
  if (kernels.empty()) throw std::invalid_argument("need at least one kernel");
  if (options.max_pairs == 0) throw std::invalid_argument("max_pairs must be positive");
  const auto order = canonical_order(data);
  PairSet set;
  set.dim_ = kernels.size();
  set.population_ = n * (n - 1) / 2;
  if (set.population_ <= options.max_pairs) {
    set.rows_.reserve(set.population_ * set.dim_);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) append_pair(set.rows_, kernels, data, order[a], order[b]);
    }
  } else {
    const auto picks = sample_without_replacement(set.population_, options.max_pairs, options.seed);
    set.rows_.reserve(picks.size() * set.dim_);
    for (std::size_t index : picks) {
      const auto [a, b] = pair_from_index(index, n);
      append_pair(set.rows_, kernels, data, order[a], order[b]);
    }
  }
  set.size_ = set.rows_.size() / set.dim_;
  return set;
}

PairSet PairSet::from_pairs(std::span<const KSpacePair> pairs) {
  if (pairs.empty()) throw std::invalid_argument("PairSet::from_pairs: no pairs");
  PairSet set;
  set.dim_ = pairs.front().z.size();
  if (set.dim_ == 0) throw std::invalid_argument("PairSet::from_pairs: empty feature vectors");
  set.rows_.reserve(pairs.size() * set.dim_);
  for (const auto& pair : pairs) {
    if (pair.z.size() != set.dim_) throw std::invalid_argument("PairSet::from_pairs: ragged pairs");
    for (double v : pair.z) set.rows_.push_back(pair.label_product * v);
  }
  set.size_ = pairs.size();
  set.population_ = set.size_;
  return set;
}

double PairSet::max_row_norm() const {
  double best = 0.0;
  for (std::size_t k = 0; k < size_; ++k) {
    const auto r = row(k);
    best = std::max(best, inner(r, r));
  }
  return std::sqrt(best);
}

double PairSet::mean_hinge(std::span<const double> mu) const {
  if (mu.size() != dim_) throw std::invalid_argument("mu length does not match kernel count");
  double sum = 0.0;
  const double* a = rows_.data();
  for (std::size_t k = 0; k < size_; ++k, a += dim_) {
    double m = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) m += mu[i] * a[i];
    if (m < 1.0) sum += 1.0 - m;
  }
  return sum / static_cast<double>(size_);
}

double empirical_risk(std::span<const double> mu, const LabeledDataset& data,
                      std::span<const BaseKernel> kernels, const PairOptions& options) {
  if (mu.size() != kernels.size()) throw std::invalid_argument("mu length does not match kernel count");
  return PairSet::enumerate(data, kernels, options).mean_hinge(mu);
}

double diagonal_risk(std::span<const double> mu, const LabeledDataset& data,
                     std::span<const BaseKernel> kernels, DiagonalWeight weight) {
  const std::size_t n = data.size();
  if (n < 2) throw std::invalid_argument("pairwise risk needs at least two points");
  if (mu.size() != kernels.size()) throw std::invalid_argument("mu length does not match kernel count");
  std::vector<double> z(kernels.size());
  double sum = 0.0;
  for (std::size_t i : canonical_order(data)) {
    kspace_features(kernels, data.point(i), data.point(i), z);
    sum += std::max(0.0, 1.0 - inner(mu, z));
  }
  const double nn = static_cast<double>(n);
  return weight == DiagonalWeight::footnote ? 2.0 * sum / (nn * (nn + 1.0)) : sum / nn;
}

double empirical_risk_with_diagonal(std::span<const double> mu, const LabeledDataset& data,
                                    std::span<const BaseKernel> kernels, DiagonalWeight weight,
                                    const PairOptions& options) {
  return empirical_risk(mu, data, kernels, options) + diagonal_risk(mu, data, kernels, weight);
}

EmpiricalSource::EmpiricalSource(LabeledDataset data) : data_(std::move(data)) {
  if (data_.empty()) throw std::invalid_argument("EmpiricalSource: empty dataset");
}

int EmpiricalSource::draw(Rng& rng, std::span<double> x) const {
  const auto i = static_cast<std::size_t>(uniform_index(rng, data_.size()));
  const auto p = data_.point(i);
  std::copy(p.begin(), p.end(), x.begin());
  return data_.label(i);
}

namespace {

double exact_pair_average(std::span<const double> mu, const LabeledDataset& atoms,
                          std::span<const BaseKernel> kernels) {
  std::vector<double> z(kernels.size());
  double sum = 0.0;
  const std::size_t m = atoms.size();
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      kspace_features(kernels, atoms.point(a), atoms.point(b), z);
      const double yy = static_cast<double>(atoms.label(a) * atoms.label(b));
      sum += std::max(0.0, 1.0 - yy * inner(mu, z));
    }
  }
  const double mm = static_cast<double>(m);
  return sum / (mm * mm);
}

}  // namespace

double ordered_pair_risk(std::span<const double> mu, const LabeledDataset& data,
                         std::span<const BaseKernel> kernels) {
  if (data.empty()) throw std::invalid_argument("ordered_pair_risk: empty dataset");
  if (mu.size() != kernels.size()) throw std::invalid_argument("mu length does not match kernel count");
  return exact_pair_average(mu, data, kernels);
}

RiskEstimate true_risk_mc(std::span<const double> mu, const PairSampler& sampler,
                          std::span<const BaseKernel> kernels, std::size_t num_pairs,
                          RiskMode mode) {
  if (!sampler.source) throw std::invalid_argument("true_risk_mc: sampler has no source");
  if (mu.size() != kernels.size()) throw std::invalid_argument("mu length does not match kernel count");
  RiskEstimate est;
  if (mode == RiskMode::exact_enumeration) {
    const LabeledDataset* atoms = sampler.source->atoms();
    if (atoms == nullptr) throw std::invalid_argument("exact enumeration needs a finite-support source");
    est.value = exact_pair_average(mu, *atoms, kernels);
    est.num_samples = atoms->size() * atoms->size();
    return est;
  }
  if (num_pairs == 0) throw std::invalid_argument("true_risk_mc: num_pairs must be >= 1");
  Rng rng(sampler.seed);
  const std::size_t d = sampler.source->dim();
  std::vector<double> x(d), x2(d), z(kernels.size());
  double mean = 0.0, m2 = 0.0;
  for (std::size_t k = 0; k < num_pairs; ++k) {
    const int y = sampler.source->draw(rng, x);
    const int y2 = sampler.source->draw(rng, x2);
    kspace_features(kernels, x, x2, z);
    const double h = std::max(0.0, 1.0 - static_cast<double>(y * y2) * inner(mu, z));
    const double delta = h - mean;
    mean += delta / static_cast<double>(k + 1);
    m2 += delta * (h - mean);
  }
  est.value = mean;
  est.num_samples = num_pairs;
  if (num_pairs > 1) {
    const double var = m2 / static_cast<double>(num_pairs - 1);
    est.std_error = std::sqrt(std::max(0.0, var) / static_cast<double>(num_pairs));
  }
  return est;
}

}  // namespace kgood

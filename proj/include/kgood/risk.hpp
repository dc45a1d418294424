#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "kgood/dataset.hpp"
#include "kgood/kernels.hpp"
#include "kgood/rng.hpp"

namespace kgood {

// Above this many unordered pairs the U-statistic is estimated on a uniform
// without-replacement subsample of this size.
inline constexpr std::size_t kMaxEnumeratedPairs = 2'000'000;

// [1 - yy' <mu, z>]_+
double pair_hinge(std::span<const double> mu, const KSpacePair& pair);

struct PairOptions {
  std::size_t max_pairs = kMaxEnumeratedPairs;
  std::uint64_t seed = 0;  // only used when subsampling
};

// The signed K-space features a_k = y_i y_j z(x_i, x_j) of a set of unordered
// training pairs, stored row-major. Full enumeration visits points in a
// canonical order so that sums over pairs do not depend on how the dataset is
// permuted.
class PairSet {
 public:
  static PairSet enumerate(const LabeledDataset& data, std::span<const BaseKernel> kernels,
                           const PairOptions& options = {});
  static PairSet from_pairs(std::span<const KSpacePair> pairs);

  std::size_t size() const noexcept { return size_; }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const double> row(std::size_t k) const { return {rows_.data() + k * dim_, dim_}; }
  const std::vector<double>& rows() const noexcept { return rows_; }

  // Unordered pairs in the population; equals size() unless subsampled.
  std::size_t population() const noexcept { return population_; }
  bool subsampled() const noexcept { return population_ != size_; }

  // Largest ||a_k||_2 over the set.
  double max_row_norm() const;

  // Mean over pairs of [1 - <mu, a_k>]_+, summed in storage order.
  double mean_hinge(std::span<const double> mu) const;

 private:
  std::size_t size_ = 0;
  std::size_t dim_ = 0;
  std::size_t population_ = 0;
  std::vector<double> rows_;
};

// Indices of the points of `data` in canonical (lexicographic feature, then
// label) order.
std::vector<std::size_t> canonical_order(const LabeledDataset& data);

// Maps a linear index in [0, n(n-1)/2) to the unordered pair (i, j), i < j,
// of the row-by-row enumeration (0,1), (0,2), ..., (1,2), ...
std::pair<std::size_t, std::size_t> pair_from_index(std::size_t index, std::size_t n);

// U-statistic empirical risk over unordered pairs; throws when n < 2.
double empirical_risk(std::span<const double> mu, const LabeledDataset& data,
                      std::span<const BaseKernel> kernels, const PairOptions& options = {});

enum class DiagonalWeight {
  footnote,       // 2 / (n (n + 1)) times the sum of diagonal hinges
  plain_average,  // 1 / n times the sum of diagonal hinges
};

// The additional diagonal term sum_i [1 - <mu, z(x_i, x_i)>]_+ with the chosen
// normalization.
double diagonal_risk(std::span<const double> mu, const LabeledDataset& data,
                     std::span<const BaseKernel> kernels,
                     DiagonalWeight weight = DiagonalWeight::footnote);

double empirical_risk_with_diagonal(std::span<const double> mu, const LabeledDataset& data,
                                    std::span<const BaseKernel> kernels,
                                    DiagonalWeight weight = DiagonalWeight::footnote,
                                    const PairOptions& options = {});

// A distribution over labeled points.
class PointSource {
 public:
  virtual ~PointSource() = default;
  virtual std::size_t dim() const = 0;
  // Draws one point into x (size dim()) and returns its label.
  virtual int draw(Rng& rng, std::span<double> x) const = 0;
  // Finite-support sources expose their atoms; probabilities are uniform.
  virtual const LabeledDataset* atoms() const { return nullptr; }
};

// Uniform sampling with replacement from a dataset.
class EmpiricalSource final : public PointSource {
 public:
  explicit EmpiricalSource(LabeledDataset data);
  std::size_t dim() const override { return data_.dim(); }
  int draw(Rng& rng, std::span<double> x) const override;
  const LabeledDataset* atoms() const override { return &data_; }

 private:
  LabeledDataset data_;
};

// Independent pairs (x, y), (x', y') from D x D.
struct PairSampler {
  std::shared_ptr<const PointSource> source;
  std::uint64_t seed = 0;
};

enum class RiskMode { monte_carlo, exact_enumeration };

struct RiskEstimate {
  double value = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(num_samples)
  std::size_t num_samples = 0;
};

// Estimate of R(mu) = E[[1 - yy' K_mu(x, x')]_+]. Exact enumeration averages
// over all ordered atom pairs (including i = j) of a finite-support source.
RiskEstimate true_risk_mc(std::span<const double> mu, const PairSampler& sampler,
                          std::span<const BaseKernel> kernels, std::size_t num_pairs,
                          RiskMode mode = RiskMode::monte_carlo);

// Exact ordered-pair risk of the empirical distribution of `data`.
double ordered_pair_risk(std::span<const double> mu, const LabeledDataset& data,
                         std::span<const BaseKernel> kernels);

inline bool is_combination_good(double risk_value, double epsilon) { return risk_value <= epsilon; }

}  // namespace kgood

#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace kgood {

// n points of a common dimension with labels in {-1, +1}. Points are stored
// row-major in one buffer.
class LabeledDataset {
 public:
  LabeledDataset() = default;
  explicit LabeledDataset(std::size_t dim) : dim_(dim) {}
  LabeledDataset(std::size_t dim, std::vector<double> features, std::vector<int> labels);

  void push_back(std::span<const double> x, int label);

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return labels_.empty(); }

  std::span<const double> point(std::size_t i) const {
    return {features_.data() + i * dim_, dim_};
  }
  int label(std::size_t i) const { return labels_[i]; }

  const std::vector<double>& features() const noexcept { return features_; }
  const std::vector<int>& labels() const noexcept { return labels_; }

  // Rows [first, first + count) as a new dataset.
  LabeledDataset slice(std::size_t first, std::size_t count) const;

 private:
  std::size_t dim_ = 0;
  std::vector<double> features_;
  std::vector<int> labels_;
};

// Dataset CSV: one row per sample, label (+1/-1) first, then real features.
// A leading header row is detected by a non-numeric first field and skipped.
// Throws std::runtime_error naming the offending line.
LabeledDataset parse_dataset_csv(std::istream& in, const std::string& source_name = "<stream>");
LabeledDataset load_dataset(const std::filesystem::path& path);

}  // namespace kgood

#include "kgood/dataset.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string_view>

namespace kgood {

LabeledDataset::LabeledDataset(std::size_t dim, std::vector<double> features,
                               std::vector<int> labels)
    : dim_(dim), features_(std::move(features)), labels_(std::move(labels)) {
  if (features_.size() != dim_ * labels_.size()) {
    throw std::invalid_argument("LabeledDataset: feature buffer size does not match dim * n");
  }
  for (int y : labels_) {
    if (y != 1 && y != -1) throw std::invalid_argument("LabeledDataset: labels must be +1 or -1");
  }
}

void LabeledDataset::push_back(std::span<const double> x, int label) {
  if (x.size() != dim_) throw std::invalid_argument("LabeledDataset: point dimension mismatch");
  if (label != 1 && label != -1) {
    throw std::invalid_argument("LabeledDataset: labels must be +1 or -1");
  }
  features_.insert(features_.end(), x.begin(), x.end());
  labels_.push_back(label);
}

LabeledDataset LabeledDataset::slice(std::size_t first, std::size_t count) const {
  if (first + count > size()) throw std::out_of_range("LabeledDataset::slice out of range");
  std::vector<double> f(features_.begin() + static_cast<std::ptrdiff_t>(first * dim_),
                        features_.begin() + static_cast<std::ptrdiff_t>((first + count) * dim_));
  std::vector<int> l(labels_.begin() + static_cast<std::ptrdiff_t>(first),
                     labels_.begin() + static_cast<std::ptrdiff_t>(first + count));
  return LabeledDataset(dim_, std::move(f), std::move(l));
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Typeset minus signs (U+2212) show up in hand-written files.
std::string normalize_minus(std::string line) {
  static const std::string kMinus = "\xE2\x88\x92";
  for (auto pos = line.find(kMinus); pos != std::string::npos; pos = line.find(kMinus, pos)) {
    line.replace(pos, kMinus.size(), "-");
  }
  return line;
}

bool parse_double(std::string_view field, double& out) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  if (field.empty()) return false;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

}  // namespace

LabeledDataset parse_dataset_csv(std::istream& in, const std::string& source_name) {
  std::vector<double> features;
  std::vector<int> labels;
  std::size_t dim = 0;
  bool have_rows = false;
  bool first_line = true;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = normalize_minus(raw);
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    double label_value = 0.0;
    if (!parse_double(fields[0], label_value)) {
      if (first_line) {
        first_line = false;
        continue;  // header
      }
      throw std::runtime_error(source_name + ":" + std::to_string(line_no) +
                               ": malformed label field '" + std::string(trim(fields[0])) + "'");
    }
    first_line = false;
    if (label_value != 1.0 && label_value != -1.0) {
      throw std::runtime_error(source_name + ":" + std::to_string(line_no) +
                               ": label must be +1 or -1");
    }
    if (fields.size() < 2) {
      throw std::runtime_error(source_name + ":" + std::to_string(line_no) + ": row has no features");
    }
    if (!have_rows) {
      dim = fields.size() - 1;
      have_rows = true;
    } else if (fields.size() - 1 != dim) {
      throw std::runtime_error(source_name + ":" + std::to_string(line_no) + ": expected " +
                               std::to_string(dim) + " features, found " +
                               std::to_string(fields.size() - 1));
    }
    for (std::size_t c = 1; c < fields.size(); ++c) {
      double v = 0.0;
      if (!parse_double(fields[c], v)) {
        throw std::runtime_error(source_name + ":" + std::to_string(line_no) +
                                 ": malformed feature in column " + std::to_string(c + 1));
      }
      features.push_back(v);
    }
    labels.push_back(label_value > 0 ? 1 : -1);
  }
  if (labels.empty()) throw std::runtime_error(source_name + ": no data rows");
  return LabeledDataset(dim, std::move(features), std::move(labels));
}

LabeledDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset " + path.string());
  return parse_dataset_csv(in, path.string());
}

}  // namespace kgood

#include "kgood/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kgood {

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::linear: return "linear";
    case KernelKind::rbf: return "rbf";
    case KernelKind::polynomial: return "poly";
    case KernelKind::table: return "table";
  }
  return "unknown";
}

double KernelTable::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

std::shared_ptr<const KernelTable> load_kernel_table(const std::filesystem::path& path,
                                                     double bound) {
  if (!(bound > 0.0)) throw std::invalid_argument("table kernel needs an explicit bound > 0");
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open kernel table " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                 ": malformed table entry");
      }
    }
    rows.push_back(std::move(row));
  }
  auto table = std::make_shared<KernelTable>();
  table->size = rows.size();
  if (table->size == 0) throw std::runtime_error(path.string() + ": empty kernel table");
  table->values.resize(table->size * table->size);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != table->size) {
      throw std::runtime_error(path.string() + ": kernel table is not square");
    }
    std::copy(rows[i].begin(), rows[i].end(), table->values.begin() + static_cast<std::ptrdiff_t>(i * table->size));
  }
  for (std::size_t i = 0; i < table->size; ++i) {
    for (std::size_t j = i + 1; j < table->size; ++j) {
      const double a = table->at(i, j);
      const double b = table->at(j, i);
      if (std::abs(a - b) > 1e-12 * bound) {
        throw std::runtime_error(path.string() + ": kernel table is not symmetric");
      }
      const double avg = 0.5 * (a + b);
      table->values[i * table->size + j] = avg;
      table->values[j * table->size + i] = avg;
    }
  }
  if (table->max_abs() > bound) {
    throw std::runtime_error(path.string() + ": table entry exceeds declared bound " +
                             std::to_string(bound));
  }
  return table;
}

BaseKernel BaseKernel::linear(double domain_radius) {
  if (!(domain_radius > 0.0)) throw std::invalid_argument("linear kernel: domain_radius must be > 0");
  BaseKernel k;
  k.kind_ = KernelKind::linear;
  k.domain_radius_ = domain_radius;
  k.bound_ = domain_radius * domain_radius;
  return k;
}

BaseKernel BaseKernel::rbf(double width, double bound) {
  if (!(width > 0.0)) throw std::invalid_argument("rbf kernel: width must be > 0");
  if (!(bound >= 1.0)) throw std::invalid_argument("rbf kernel: bound must be >= 1 (K(x, x) = 1)");
  BaseKernel k;
  k.kind_ = KernelKind::rbf;
  k.width_ = width;
  k.bound_ = bound;
  return k;
}

BaseKernel BaseKernel::polynomial(int degree, double offset, double domain_radius) {
  if (degree < 1) throw std::invalid_argument("poly kernel: degree must be >= 1");
  if (offset < 0.0) throw std::invalid_argument("poly kernel: offset must be >= 0");
  if (!(domain_radius > 0.0)) throw std::invalid_argument("poly kernel: domain_radius must be > 0");
  BaseKernel k;
  k.kind_ = KernelKind::polynomial;
  k.degree_ = degree;
  k.offset_ = offset;
  k.domain_radius_ = domain_radius;
  k.bound_ = std::pow(domain_radius * domain_radius + offset, degree);
  return k;
}

BaseKernel BaseKernel::table(std::shared_ptr<const KernelTable> table, double bound) {
  if (!table) throw std::invalid_argument("table kernel: missing table");
  if (!(bound > 0.0)) throw std::invalid_argument("table kernel: bound must be > 0");
  if (table->max_abs() > bound) throw std::invalid_argument("table kernel: entry exceeds bound");
  BaseKernel k;
  k.kind_ = KernelKind::table;
  k.table_ = std::move(table);
  k.bound_ = bound;
  return k;
}

BaseKernel BaseKernel::with_bound(double bound) const {
  if (!(bound > 0.0)) throw std::invalid_argument("kernel bound must be > 0");
  if (kind_ == KernelKind::table && table_->max_abs() > bound) {
    throw std::invalid_argument("table kernel: entry exceeds bound");
  }
  BaseKernel k = *this;
  k.bound_ = bound;
  return k;
}

BaseKernel BaseKernel::on_features(std::vector<std::size_t> features) const {
  if (features.empty()) throw std::invalid_argument("feature subset must be nonempty");
  BaseKernel k = *this;
  k.features_ = std::move(features);
  return k;
}

double BaseKernel::dot(std::span<const double> x, std::span<const double> x2) const {
  double s = 0.0;
  if (features_.empty()) {
    for (std::size_t d = 0; d < x.size(); ++d) s += x[d] * x2[d];
  } else {
    for (std::size_t f : features_) {
      if (f >= x.size()) throw std::out_of_range("kernel feature index out of range");
      s += x[f] * x2[f];
    }
  }
  return s;
}

double BaseKernel::sqdist(std::span<const double> x, std::span<const double> x2) const {
  double s = 0.0;
  if (features_.empty()) {
    for (std::size_t d = 0; d < x.size(); ++d) {
      const double diff = x[d] - x2[d];
      s += diff * diff;
    }
  } else {
    for (std::size_t f : features_) {
      if (f >= x.size()) throw std::out_of_range("kernel feature index out of range");
      const double diff = x[f] - x2[f];
      s += diff * diff;
    }
  }
  return s;
}

std::size_t BaseKernel::table_index(std::span<const double> x) const {
  const std::size_t coord = features_.empty() ? 0 : features_.front();
  if (coord >= x.size()) throw std::out_of_range("table kernel: point has no index coordinate");
  const double v = x[coord];
  if (!(v >= 0.0) || std::floor(v) != v || v >= static_cast<double>(table_->size)) {
    throw std::out_of_range("table kernel: index " + std::to_string(v) + " out of range");
  }
  return static_cast<std::size_t>(v);
}

double BaseKernel::operator()(std::span<const double> x, std::span<const double> x2) const {
  if (x.size() != x2.size()) throw std::invalid_argument("kernel: point dimension mismatch");
  switch (kind_) {
    case KernelKind::linear: return dot(x, x2);
    case KernelKind::rbf: return std::exp(-sqdist(x, x2) / (width_ * width_));
    case KernelKind::polynomial: {
      const double base = dot(x, x2) + offset_;
      double r = 1.0;
      for (int d = 0; d < degree_; ++d) r *= base;
      return r;
    }
    case KernelKind::table: return table_->at(table_index(x), table_index(x2));
  }
  return 0.0;
}

double eval_kernel(const BaseKernel& k, std::span<const double> x, std::span<const double> x2) {
  return k(x, x2);
}

KappaVector::KappaVector(std::vector<double> entries) : entries_(std::move(entries)) {
  for (double v : entries_) {
    if (!(v > 0.0)) throw std::invalid_argument("kappa entries must be > 0");
  }
}

KappaVector kappa_of(std::span<const BaseKernel> kernels) {
  std::vector<double> e;
  e.reserve(kernels.size());
  for (const auto& k : kernels) e.push_back(k.bound());
  return KappaVector(std::move(e));
}

KappaNorms kappa_norms(const KappaVector& kappa) {
  KappaNorms out;
  double sq = 0.0;
  for (double v : kappa.entries()) {
    sq += v * v;
    out.linf = std::max(out.linf, std::abs(v));
  }
  out.l2 = std::sqrt(sq);
  return out;
}

void kspace_features(std::span<const BaseKernel> kernels, std::span<const double> x,
                     std::span<const double> x2, std::span<double> out) {
  for (std::size_t i = 0; i < kernels.size(); ++i) out[i] = kernels[i](x, x2);
}

KSpacePair kspace_map(std::span<const BaseKernel> kernels, std::span<const double> x_i, int y_i,
                      std::span<const double> x_j, int y_j) {
  if (kernels.empty()) throw std::invalid_argument("kspace_map: need at least one kernel");
  KSpacePair pair;
  pair.z.resize(kernels.size());
  kspace_features(kernels, x_i, x_j, pair.z);
  pair.label_product = static_cast<double>(y_i * y_j);
  return pair;
}

double inner(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double combined_kernel(std::span<const double> mu, std::span<const BaseKernel> kernels,
                       std::span<const double> x, std::span<const double> x2) {
  if (mu.size() != kernels.size()) {
    throw std::invalid_argument("combined_kernel: mu has " + std::to_string(mu.size()) +
                                " entries for " + std::to_string(kernels.size()) + " kernels");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < kernels.size(); ++i) s += mu[i] * kernels[i](x, x2);
  return s;
}

Eigen::MatrixXd gram_matrix(std::span<const double> mu, std::span<const BaseKernel> kernels,
                            const LabeledDataset& points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  if (n < 1) throw std::invalid_argument("gram_matrix: need at least one point");
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const double v = combined_kernel(mu, kernels, points.point(static_cast<std::size_t>(i)),
                                       points.point(static_cast<std::size_t>(j)));
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

}  // namespace kgood

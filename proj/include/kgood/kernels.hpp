#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kgood/dataset.hpp"

namespace kgood {

// Weights of a kernel combination. Learned vectors are nonnegative; the
// evaluation routines accept any real vector.
using CombinationVector = std::vector<double>;

enum class KernelKind { linear, rbf, polynomial, table };

std::string to_string(KernelKind kind);

// Symmetric precomputed Gram table. A point addresses a row through the value
// of its first selected coordinate, which must be an integer in range.
struct KernelTable {
  std::size_t size = 0;
  std::vector<double> values;  // row-major, size x size

  double at(std::size_t i, std::size_t j) const { return values[i * size + j]; }
  double max_abs() const;
};

// Reads a square numeric CSV table and checks it is symmetric with every
// |entry| <= bound.
std::shared_ptr<const KernelTable> load_kernel_table(const std::filesystem::path& path,
                                                     double bound);

// A symmetric PSD base kernel with a declared bound kappa^2 on |K(x, x')|.
//
//   linear      K = <x, x'>                      default bound R^2
//   rbf         K = exp(-||x - x'||^2 / width^2)  default bound 1
//   polynomial  K = (<x, x'> + offset)^degree     default bound (R^2 + offset)^degree
//   table       K = T[x_0][x'_0]                  bound must be given
//
// R is a declared domain radius. A kernel can be restricted to a subset of
// coordinates; the formulas then apply to the selected coordinates only.
class BaseKernel {
 public:
  static BaseKernel linear(double domain_radius = 1.0);
  static BaseKernel rbf(double width, double bound = 1.0);
  static BaseKernel polynomial(int degree, double offset, double domain_radius = 1.0);
  static BaseKernel table(std::shared_ptr<const KernelTable> table, double bound);

  BaseKernel with_bound(double bound) const;
  BaseKernel on_features(std::vector<std::size_t> features) const;

  // Throws std::invalid_argument on dimension mismatch and std::out_of_range
  // for a bad table index or feature index.
  double operator()(std::span<const double> x, std::span<const double> x2) const;

  KernelKind kind() const noexcept { return kind_; }
  double bound() const noexcept { return bound_; }
  double width() const noexcept { return width_; }
  int degree() const noexcept { return degree_; }
  double offset() const noexcept { return offset_; }
  double domain_radius() const noexcept { return domain_radius_; }
  const std::vector<std::size_t>& features() const noexcept { return features_; }
  const std::shared_ptr<const KernelTable>& table_data() const noexcept { return table_; }

 private:
  BaseKernel() = default;
  double dot(std::span<const double> x, std::span<const double> x2) const;
  double sqdist(std::span<const double> x, std::span<const double> x2) const;
  std::size_t table_index(std::span<const double> x) const;

  KernelKind kind_ = KernelKind::linear;
  double bound_ = 1.0;
  double width_ = 1.0;
  int degree_ = 1;
  double offset_ = 0.0;
  double domain_radius_ = 1.0;
  std::vector<std::size_t> features_;
  std::shared_ptr<const KernelTable> table_;
};

using KernelList = std::vector<BaseKernel>;

double eval_kernel(const BaseKernel& k, std::span<const double> x, std::span<const double> x2);

// kappa = (kappa_1^2, ..., kappa_p^2), all entries > 0.
class KappaVector {
 public:
  explicit KappaVector(std::vector<double> entries);
  const std::vector<double>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  double operator[](std::size_t i) const { return entries_[i]; }

 private:
  std::vector<double> entries_;
};

KappaVector kappa_of(std::span<const BaseKernel> kernels);

struct KappaNorms {
  double l2 = 0.0;
  double linf = 0.0;
};

KappaNorms kappa_norms(const KappaVector& kappa);

// The K-space image of a labeled point pair.
struct KSpacePair {
  std::vector<double> z;
  double label_product = 1.0;
};

KSpacePair kspace_map(std::span<const BaseKernel> kernels, std::span<const double> x_i, int y_i,
                      std::span<const double> x_j, int y_j);

// Writes z(x, x2) into out (size p).
void kspace_features(std::span<const BaseKernel> kernels, std::span<const double> x,
                     std::span<const double> x2, std::span<double> out);

// <mu, z(x, x2)>.
double combined_kernel(std::span<const double> mu, std::span<const BaseKernel> kernels,
                       std::span<const double> x, std::span<const double> x2);

Eigen::MatrixXd gram_matrix(std::span<const double> mu, std::span<const BaseKernel> kernels,
                            const LabeledDataset& points);

double inner(std::span<const double> a, std::span<const double> b);

}  // namespace kgood

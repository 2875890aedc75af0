#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace memoir {

using FeatureId = std::uint32_t;
using ClassId = std::uint32_t;

/// Sparse real vector in R^dim stored as strictly increasing (index, value)
/// pairs. Indices are 0-based.
class SparseVector {
 public:
  SparseVector() = default;
  explicit SparseVector(std::size_t dim) : dim_(dim) {}

  /// Validates that `indices` is strictly increasing and bounded by `dim`.
  SparseVector(std::size_t dim, std::vector<FeatureId> indices,
               std::vector<double> values);

  /// Builds from unordered pairs; duplicate indices are an error.
  static SparseVector from_pairs(std::size_t dim,
                                 std::vector<std::pair<FeatureId, double>> pairs);

  /// Dense convenience constructor; zero entries are skipped.
  static SparseVector from_dense(std::span<const double> dense);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t nnz() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }

  std::span<const FeatureId> indices() const noexcept { return indices_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> mutable_values() noexcept { return values_; }

  /// Value at `index`, 0 when absent. O(log nnz).
  double at(FeatureId index) const;

  double squared_norm() const noexcept;
  double norm() const noexcept;
  double l1_norm() const noexcept;

  /// Multiplies every stored value by `alpha`.
  void scale(double alpha) noexcept;

  /// Drops explicitly stored zeros.
  void purge_zeros();

  /// Drops entries with index >= new_dim and shrinks dim. Returns the
  /// number of dropped entries.
  std::size_t truncate_dim(std::size_t new_dim);

  std::vector<double> to_dense() const;

  void clear() noexcept {
    indices_.clear();
    values_.clear();
  }

  /// Appends an entry; `index` must exceed every stored index.
  void push_back(FeatureId index, double value);

  friend bool operator==(const SparseVector&, const SparseVector&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<FeatureId> indices_;
  std::vector<double> values_;
};

/// Exact sparse inner product by a merge over sorted indices.
/// Throws DimensionError when dims differ.
double dot(const SparseVector& a, const SparseVector& b);

/// Inner product of a sparse vector with a dense one of matching length.
double dot(const SparseVector& a, std::span<const double> dense);

/// a + alpha * b over the union of supports.
SparseVector add_scaled(const SparseVector& a, double alpha, const SparseVector& b);

}  // namespace memoir

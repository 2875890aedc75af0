#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "memoir/sparse_vector.hpp"

namespace memoir {

/// The model W: C sparse class rows sharing one lazy scale multiplier.
///
/// The logical value of row c is `scale() * stored_row(c)`. Every public
/// operation is specified on logical values; multiplying the whole matrix by
/// a scalar costs O(1). When the multiplier leaves [kMinScale, kMaxScale] it
/// is folded into the rows.
///
/// Single writer. Const member functions may be called concurrently as long
/// as no mutation overlaps them.
class WeightMatrix {
 public:
  static constexpr double kMinScale = 1e-8;
  static constexpr double kMaxScale = 1e8;

  WeightMatrix() = default;
  WeightMatrix(std::size_t num_classes, std::size_t dim);

  std::size_t num_classes() const noexcept { return rows_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  double scale() const noexcept { return scale_; }

  /// Number of times the multiplier has been folded into the rows. Any
  /// consumer caching stored rows must resynchronise when this changes.
  std::size_t fold_count() const noexcept { return fold_count_; }

  /// Unscaled storage of row c.
  const SparseVector& stored_row(ClassId c) const;
  double stored_row_sq_norm(ClassId c) const;
  double stored_frob_sq() const;

  /// Logical inner product omega_c^T x.
  double row_dot(ClassId c, const SparseVector& x) const;
  /// Unscaled inner product stored_row(c)^T x.
  double stored_dot(ClassId c, const SparseVector& x) const;

  /// Logical row c += coeff * x, applied immediately.
  void add_to_row(ClassId c, double coeff, const SparseVector& x);

  /// Queues logical row c += coeff * x. Queued updates are merged per row
  /// by commit(); reads are rejected while updates are pending.
  void stage_add(ClassId c, double coeff, const SparseVector& x);
  /// Merges all queued updates. Returns the classes that changed, sorted.
  std::vector<ClassId> commit();
  bool has_pending() const noexcept { return pending_count_ > 0; }

  /// W *= alpha in O(1). alpha must be positive.
  void global_scale(double alpha);

  /// Applies phi = min(1, 1 / (sqrt(lambda) * ||W||_F)) and returns phi.
  double project_to_ball(double lambda);

  /// Logical row c with the multiplier folded in.
  SparseVector materialize_row(ClassId c) const;

  /// Replaces logical row c.
  void set_row(ClassId c, const SparseVector& logical_row);

  /// Folds the multiplier into the rows and purges stored zeros.
  void fold();

  double frobenius_norm() const;
  double frobenius_sq() const;
  double l1_norm() const;
  std::size_t nnz() const;

 private:
  void check_class(ClassId c) const;
  void check_readable() const;
  void refresh_row_cache(ClassId c);
  void refresh_frob();

  std::size_t dim_ = 0;
  double scale_ = 1.0;
  std::size_t fold_count_ = 0;
  std::vector<SparseVector> rows_;
  std::vector<double> row_sq_norms_;
  double frob_sq_ = 0.0;

  std::vector<std::vector<std::pair<FeatureId, double>>> pending_;
  std::vector<ClassId> pending_rows_;
  std::size_t pending_count_ = 0;
};

}  // namespace memoir

#include "memoir/weight_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "memoir/error.hpp"

namespace memoir {

WeightMatrix::WeightMatrix(std::size_t num_classes, std::size_t dim)
    : dim_(dim),
      rows_(num_classes, SparseVector(dim)),
      row_sq_norms_(num_classes, 0.0),
      pending_(num_classes) {}

void WeightMatrix::check_class(ClassId c) const {
  if (c >= rows_.size()) {
    throw Error("weight matrix: class id " + std::to_string(c) +
                " out of range (C=" + std::to_string(rows_.size()) + ")");
  }
}

void WeightMatrix::check_readable() const {
  if (pending_count_ > 0) {
    throw Error("weight matrix: read with uncommitted staged updates");
  }
}

const SparseVector& WeightMatrix::stored_row(ClassId c) const {
  check_class(c);
  return rows_[c];
}

double WeightMatrix::stored_row_sq_norm(ClassId c) const {
  check_class(c);
  check_readable();
  return row_sq_norms_[c];
}

double WeightMatrix::stored_frob_sq() const {
  check_readable();
  return frob_sq_;
}

double WeightMatrix::row_dot(ClassId c, const SparseVector& x) const {
  return scale_ * stored_dot(c, x);
}

double WeightMatrix::stored_dot(ClassId c, const SparseVector& x) const {
  check_class(c);
  check_readable();
  return dot(rows_[c], x);
}

void WeightMatrix::add_to_row(ClassId c, double coeff, const SparseVector& x) {
  stage_add(c, coeff, x);
  commit();
}

void WeightMatrix::stage_add(ClassId c, double coeff, const SparseVector& x) {
  check_class(c);
  if (x.dim() != dim_) {
    throw DimensionError("add_to_row: vector dim " + std::to_string(x.dim()) +
                         " does not match matrix dim " + std::to_string(dim_));
  }
  if (coeff == 0.0 || x.empty()) return;
  const double stored_coeff = coeff / scale_;
  auto& queue = pending_[c];
  if (queue.empty()) pending_rows_.push_back(c);
  const auto idx = x.indices();
  const auto val = x.values();
  for (std::size_t k = 0; k < idx.size(); ++k) {
    queue.emplace_back(idx[k], stored_coeff * val[k]);
  }
  pending_count_ += idx.size();
}

std::vector<ClassId> WeightMatrix::commit() {
  std::vector<ClassId> touched;
  if (pending_rows_.empty()) return touched;
  touched.swap(pending_rows_);
  std::sort(touched.begin(), touched.end());
  for (ClassId c : touched) {
    auto& queue = pending_[c];
    std::stable_sort(queue.begin(), queue.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    const SparseVector& row = rows_[c];
    const auto ri = row.indices();
    const auto rv = row.values();
    std::vector<FeatureId> idx;
    std::vector<double> val;
    idx.reserve(ri.size() + queue.size());
    val.reserve(ri.size() + queue.size());
    std::size_t i = 0;
    std::size_t q = 0;
    while (i < ri.size() || q < queue.size()) {
      const bool take_row = q == queue.size() || (i < ri.size() && ri[i] < queue[q].first);
      if (take_row) {
        idx.push_back(ri[i]);
        val.push_back(rv[i]);
        ++i;
        continue;
      }
      const FeatureId j = queue[q].first;
      double v = 0.0;
      if (i < ri.size() && ri[i] == j) {
        v = rv[i];
        ++i;
      }
      while (q < queue.size() && queue[q].first == j) {
        v += queue[q].second;
        ++q;
      }
      idx.push_back(j);
      val.push_back(v);
    }
    rows_[c] = SparseVector(dim_, std::move(idx), std::move(val));
    queue.clear();
    refresh_row_cache(c);
  }
  pending_count_ = 0;
  refresh_frob();
  return touched;
}

void WeightMatrix::global_scale(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw Error("global_scale: factor must be positive and finite");
  }
  commit();
  if (alpha == 1.0) return;
  scale_ *= alpha;
  if (scale_ < kMinScale || scale_ > kMaxScale) fold();
}

double WeightMatrix::project_to_ball(double lambda) {
  if (!(lambda > 0.0)) throw Error("project_to_ball: lambda must be positive");
  commit();
  const double norm = frobenius_norm();
  if (norm == 0.0) return 1.0;
  const double phi = std::min(1.0, 1.0 / (std::sqrt(lambda) * norm));
  global_scale(phi);
  return phi;
}

SparseVector WeightMatrix::materialize_row(ClassId c) const {
  check_class(c);
  check_readable();
  SparseVector out = rows_[c];
  if (scale_ != 1.0) out.scale(scale_);
  return out;
}

void WeightMatrix::set_row(ClassId c, const SparseVector& logical_row) {
  check_class(c);
  if (logical_row.dim() != dim_) {
    throw DimensionError("set_row: dimension mismatch");
  }
  commit();
  rows_[c] = logical_row;
  if (scale_ != 1.0) rows_[c].scale(1.0 / scale_);
  refresh_row_cache(c);
  refresh_frob();
}

void WeightMatrix::fold() {
  commit();
  for (std::size_t c = 0; c < rows_.size(); ++c) {
    rows_[c].scale(scale_);
    rows_[c].purge_zeros();
    refresh_row_cache(static_cast<ClassId>(c));
  }
  scale_ = 1.0;
  refresh_frob();
  ++fold_count_;
}

double WeightMatrix::frobenius_norm() const { return std::sqrt(frobenius_sq()); }

double WeightMatrix::frobenius_sq() const {
  check_readable();
  return scale_ * scale_ * frob_sq_;
}

double WeightMatrix::l1_norm() const {
  check_readable();
  double s = 0.0;
  for (const auto& row : rows_) s += row.l1_norm();
  return scale_ * s;
}

std::size_t WeightMatrix::nnz() const {
  std::size_t n = 0;
  for (const auto& row : rows_) n += row.nnz();
  return n;
}

void WeightMatrix::refresh_row_cache(ClassId c) {
  row_sq_norms_[c] = rows_[c].squared_norm();
}

void WeightMatrix::refresh_frob() {
  double s = 0.0;
  for (double v : row_sq_norms_) s += v;
  frob_sq_ = s;
}

}  // namespace memoir

#include "memoir/sparse_vector.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "memoir/error.hpp"

namespace memoir {

SparseVector::SparseVector(std::size_t dim, std::vector<FeatureId> indices,
                           std::vector<double> values)
    : dim_(dim), indices_(std::move(indices)), values_(std::move(values)) {
  if (indices_.size() != values_.size()) {
    throw DimensionError("sparse vector: index/value length mismatch");
  }
  for (std::size_t k = 0; k < indices_.size(); ++k) {
    if (indices_[k] >= dim_) {
      throw DimensionError("sparse vector: index " + std::to_string(indices_[k]) +
                           " out of range for dim " + std::to_string(dim_));
    }
    if (k > 0 && indices_[k] <= indices_[k - 1]) {
      throw DimensionError("sparse vector: indices must be strictly increasing");
    }
  }
}

SparseVector SparseVector::from_pairs(
    std::size_t dim, std::vector<std::pair<FeatureId, double>> pairs) {
  std::sort(pairs.begin(), pairs.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<FeatureId> idx;
  std::vector<double> val;
  idx.reserve(pairs.size());
  val.reserve(pairs.size());
  for (const auto& [i, v] : pairs) {
    idx.push_back(i);
    val.push_back(v);
  }
  return SparseVector(dim, std::move(idx), std::move(val));
}

SparseVector SparseVector::from_dense(std::span<const double> dense) {
  SparseVector out(dense.size());
  for (std::size_t j = 0; j < dense.size(); ++j) {
    if (dense[j] != 0.0) out.push_back(static_cast<FeatureId>(j), dense[j]);
  }
  return out;
}

double SparseVector::at(FeatureId index) const {
  auto it = std::lower_bound(indices_.begin(), indices_.end(), index);
  if (it == indices_.end() || *it != index) return 0.0;
  return values_[static_cast<std::size_t>(it - indices_.begin())];
}

double SparseVector::squared_norm() const noexcept {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return s;
}

double SparseVector::norm() const noexcept { return std::sqrt(squared_norm()); }

double SparseVector::l1_norm() const noexcept {
  double s = 0.0;
  for (double v : values_) s += std::abs(v);
  return s;
}

void SparseVector::scale(double alpha) noexcept {
  for (double& v : values_) v *= alpha;
}

void SparseVector::purge_zeros() {
  std::size_t out = 0;
  for (std::size_t k = 0; k < indices_.size(); ++k) {
    if (values_[k] != 0.0) {
      indices_[out] = indices_[k];
      values_[out] = values_[k];
      ++out;
    }
  }
  indices_.resize(out);
  values_.resize(out);
}

std::size_t SparseVector::truncate_dim(std::size_t new_dim) {
  auto it = std::lower_bound(indices_.begin(), indices_.end(), new_dim,
                             [](FeatureId i, std::size_t d) { return i < d; });
  const auto keep = static_cast<std::size_t>(it - indices_.begin());
  const std::size_t dropped = indices_.size() - keep;
  indices_.resize(keep);
  values_.resize(keep);
  dim_ = new_dim;
  return dropped;
}

std::vector<double> SparseVector::to_dense() const {
  std::vector<double> out(dim_, 0.0);
  for (std::size_t k = 0; k < indices_.size(); ++k) out[indices_[k]] = values_[k];
  return out;
}

void SparseVector::push_back(FeatureId index, double value) {
  if (index >= dim_) {
    throw DimensionError("sparse vector: index " + std::to_string(index) +
                         " out of range for dim " + std::to_string(dim_));
  }
  if (!indices_.empty() && index <= indices_.back()) {
    throw DimensionError("sparse vector: indices must be strictly increasing");
  }
  indices_.push_back(index);
  values_.push_back(value);
}

double dot(const SparseVector& a, const SparseVector& b) {
  if (a.dim() != b.dim()) {
    throw DimensionError("dot: dimension mismatch (" + std::to_string(a.dim()) +
                         " vs " + std::to_string(b.dim()) + ")");
  }
  const auto ai = a.indices();
  const auto bi = b.indices();
  const auto av = a.values();
  const auto bv = b.values();
  std::size_t i = 0;
  std::size_t j = 0;
  double s = 0.0;
  while (i < ai.size() && j < bi.size()) {
    if (ai[i] < bi[j]) {
      ++i;
    } else if (ai[i] > bi[j]) {
      ++j;
    } else {
      s += av[i] * bv[j];
      ++i;
      ++j;
    }
  }
  return s;
}

double dot(const SparseVector& a, std::span<const double> dense) {
  if (a.dim() != dense.size()) {
    throw DimensionError("dot: dimension mismatch with dense vector");
  }
  double s = 0.0;
  const auto idx = a.indices();
  const auto val = a.values();
  for (std::size_t k = 0; k < idx.size(); ++k) s += val[k] * dense[idx[k]];
  return s;
}

SparseVector add_scaled(const SparseVector& a, double alpha, const SparseVector& b) {
  if (a.dim() != b.dim()) throw DimensionError("add_scaled: dimension mismatch");
  const auto ai = a.indices();
  const auto bi = b.indices();
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<FeatureId> idx;
  std::vector<double> val;
  idx.reserve(ai.size() + bi.size());
  val.reserve(ai.size() + bi.size());
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < ai.size() || j < bi.size()) {
    if (j == bi.size() || (i < ai.size() && ai[i] < bi[j])) {
      idx.push_back(ai[i]);
      val.push_back(av[i++]);
    } else if (i == ai.size() || bi[j] < ai[i]) {
      idx.push_back(bi[j]);
      val.push_back(alpha * bv[j++]);
    } else {
      idx.push_back(ai[i]);
      val.push_back(av[i++] + alpha * bv[j++]);
    }
  }
  return SparseVector(a.dim(), std::move(idx), std::move(val));
}

}  // namespace memoir

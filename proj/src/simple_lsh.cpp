#include "memoir/simple_lsh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "memoir/error.hpp"

namespace memoir {
namespace {

// Hyperplanes are materialised when they fit in this many doubles and are
// regenerated from their counter-based address otherwise.
constexpr std::size_t kDensePlaneLimit = std::size_t{1} << 22;

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

double plane_gaussian(std::uint64_t seed, std::uint64_t plane, std::uint64_t coord) {
  const std::uint64_t h1 = mix64(mix64(mix64(seed) ^ plane) ^ coord);
  const std::uint64_t h2 = mix64(h1 ^ 0x2545f4914f6cdd1dULL);
  const double u1 = static_cast<double>((h1 >> 11) + 1) * 0x1.0p-53;
  const double u2 = static_cast<double>(h2 >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<double> simplelsh_transform(const SparseVector& w, double max_norm) {
  if (!(max_norm >= 0.0)) throw Error("simplelsh_transform: U must be non-negative");
  std::vector<double> z(w.dim() + 1, 0.0);
  const double norm = w.norm();
  if (max_norm == 0.0) {
    if (norm > 0.0) throw Error("simplelsh_transform: row norm exceeds U");
    z.back() = 1.0;
    return z;
  }
  const double ratio = norm / max_norm;
  if (ratio > 1.0 + 1e-12) throw Error("simplelsh_transform: row norm exceeds U");
  const auto idx = w.indices();
  const auto val = w.values();
  for (std::size_t k = 0; k < idx.size(); ++k) z[idx[k]] = val[k] / max_norm;
  z.back() = std::sqrt(std::max(0.0, 1.0 - ratio * ratio));
  return z;
}

std::vector<double> simplelsh_query_transform(const SparseVector& x) {
  std::vector<double> z(x.dim() + 1, 0.0);
  const double norm = x.norm();
  if (norm == 0.0) return z;
  const auto idx = x.indices();
  const auto val = x.values();
  for (std::size_t k = 0; k < idx.size(); ++k) z[idx[k]] = val[k] / norm;
  return z;
}

std::uint64_t hash_code(std::span<const double> z, std::span<const double> planes,
                        std::size_t bits) {
  if (bits > 64) throw Error("hash_code: at most 64 bits per code");
  if (planes.size() != bits * z.size()) throw DimensionError("hash_code: plane shape mismatch");
  std::uint64_t code = 0;
  for (std::size_t k = 0; k < bits; ++k) {
    double s = 0.0;
    const double* p = planes.data() + k * z.size();
    for (std::size_t j = 0; j < z.size(); ++j) s += p[j] * z[j];
    if (s >= 0.0) code |= std::uint64_t{1} << k;
  }
  return code;
}

double hashing_quality(double c, double similarity) {
  if (!(c > 0.0 && c < 1.0)) throw Error("hashing_quality: c must lie in (0, 1)");
  if (!(similarity > 0.0) || !std::isfinite(similarity)) {
    throw Error("hashing_quality: S must be positive and finite");
  }
  const double num = std::log(1.0 - std::cos(similarity) / std::numbers::pi);
  const double den = std::log(1.0 - std::cos(c * similarity) / std::numbers::pi);
  if (den == 0.0) throw Error("hashing_quality: undefined where cos(cS) = 0");
  const double rho = num / den;
  if (!std::isfinite(rho)) throw Error("hashing_quality: outside the formula's domain");
  return rho;
}

SimpleLshIndex::SimpleLshIndex(std::size_t dim, const LshParams& params, std::uint64_t seed)
    : dim_(dim), params_(params), seed_(seed), planes_per_coord_(params.bits * params.tables) {
  if (params_.bits == 0 || params_.bits > 64) {
    throw ConfigError("simplelsh: bits per code must be in [1, 64]");
  }
  if (params_.tables == 0) throw ConfigError("simplelsh: need at least one table");
  if (!(params_.norm_headroom >= 1.0)) throw ConfigError("simplelsh: norm headroom must be >= 1");
  if ((dim_ + 1) * planes_per_coord_ <= kDensePlaneLimit) {
    dense_planes_.resize((dim_ + 1) * planes_per_coord_);
    for (std::size_t j = 0; j <= dim_; ++j) {
      for (std::size_t p = 0; p < planes_per_coord_; ++p) {
        dense_planes_[j * planes_per_coord_ + p] = plane_gaussian(seed_, p, j);
      }
    }
  }
  buckets_.resize(params_.tables);
}

double SimpleLshIndex::plane(std::size_t table, std::size_t bit, std::size_t coord) const {
  const std::size_t p = table * params_.bits + bit;
  if (!dense_planes_.empty()) return dense_planes_[coord * planes_per_coord_ + p];
  return plane_gaussian(seed_, p, coord);
}

void SimpleLshIndex::project(const SparseVector& v, std::vector<double>& acc) const {
  acc.assign(planes_per_coord_, 0.0);
  const auto idx = v.indices();
  const auto val = v.values();
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const double x = val[k];
    if (!dense_planes_.empty()) {
      const double* p = dense_planes_.data() + static_cast<std::size_t>(idx[k]) * planes_per_coord_;
      for (std::size_t q = 0; q < planes_per_coord_; ++q) acc[q] += x * p[q];
    } else {
      for (std::size_t q = 0; q < planes_per_coord_; ++q) {
        acc[q] += x * plane_gaussian(seed_, q, idx[k]);
      }
    }
  }
}

std::vector<std::uint64_t> SimpleLshIndex::row_codes(const SparseVector& row) const {
  std::vector<double> acc;
  project(row, acc);
  const double norm = row.norm();
  double inv = 0.0;
  double tail = 1.0;
  if (max_norm_ > 0.0) {
    inv = 1.0 / max_norm_;
    const double ratio = norm * inv;
    tail = std::sqrt(std::max(0.0, 1.0 - ratio * ratio));
  }
  std::vector<std::uint64_t> codes(params_.tables, 0);
  for (std::size_t t = 0; t < params_.tables; ++t) {
    std::uint64_t code = 0;
    for (std::size_t b = 0; b < params_.bits; ++b) {
      const std::size_t q = t * params_.bits + b;
      const double proj = acc[q] * inv + tail * plane(t, b, dim_);
      if (proj >= 0.0) code |= std::uint64_t{1} << b;
    }
    codes[t] = code;
  }
  return codes;
}

std::vector<std::uint64_t> SimpleLshIndex::query_codes(const SparseVector& x) const {
  if (x.dim() != dim_) throw DimensionError("simplelsh: query dimension mismatch");
  std::vector<double> acc;
  project(x, acc);
  std::vector<std::uint64_t> codes(params_.tables, 0);
  for (std::size_t t = 0; t < params_.tables; ++t) {
    std::uint64_t code = 0;
    for (std::size_t b = 0; b < params_.bits; ++b) {
      if (acc[t * params_.bits + b] >= 0.0) code |= std::uint64_t{1} << b;
    }
    codes[t] = code;
  }
  return codes;
}

void SimpleLshIndex::insert_codes(ClassId c) {
  codes_[c] = row_codes(rows_[c]);
  for (std::size_t t = 0; t < params_.tables; ++t) buckets_[t][codes_[c][t]].push_back(c);
}

void SimpleLshIndex::erase_codes(ClassId c) {
  for (std::size_t t = 0; t < params_.tables; ++t) {
    auto it = buckets_[t].find(codes_[c][t]);
    if (it == buckets_[t].end()) continue;
    auto& members = it->second;
    members.erase(std::remove(members.begin(), members.end(), c), members.end());
    if (members.empty()) buckets_[t].erase(it);
  }
  codes_[c].clear();
}

void SimpleLshIndex::rehash_all() {
  for (auto& table : buckets_) table.clear();
  for (std::size_t c = 0; c < rows_.size(); ++c) {
    if (present_[c]) insert_codes(static_cast<ClassId>(c));
  }
}

void SimpleLshIndex::build(std::span<const std::pair<ClassId, SparseVector>> rows) {
  rows_.clear();
  norms_.clear();
  present_.clear();
  codes_.clear();
  size_ = 0;
  max_norm_ = 0.0;
  for (const auto& [c, row] : rows) {
    if (row.dim() != dim_) throw DimensionError("simplelsh: row dimension mismatch");
    if (c >= rows_.size()) {
      rows_.resize(static_cast<std::size_t>(c) + 1, SparseVector(dim_));
      norms_.resize(rows_.size(), 0.0);
      present_.resize(rows_.size(), 0);
      codes_.resize(rows_.size());
    }
    if (present_[c]) throw Error("simplelsh: duplicate class id " + std::to_string(c));
    rows_[c] = row;
    norms_[c] = row.norm();
    present_[c] = 1;
    ++size_;
    max_norm_ = std::max(max_norm_, norms_[c]);
  }
  rehash_all();
}

void SimpleLshIndex::update_row(ClassId c, const SparseVector& row) {
  if (row.dim() != dim_) throw DimensionError("simplelsh: row dimension mismatch");
  if (c >= rows_.size()) {
    rows_.resize(static_cast<std::size_t>(c) + 1, SparseVector(dim_));
    norms_.resize(rows_.size(), 0.0);
    present_.resize(rows_.size(), 0);
    codes_.resize(rows_.size());
  }
  if (present_[c]) {
    erase_codes(c);
  } else {
    present_[c] = 1;
    ++size_;
  }
  rows_[c] = row;
  norms_[c] = row.norm();
  if (norms_[c] > max_norm_) {
    double largest = 0.0;
    for (std::size_t k = 0; k < rows_.size(); ++k) {
      if (present_[k]) largest = std::max(largest, norms_[k]);
    }
    max_norm_ = params_.norm_headroom * largest;
    ++rebuilds_;
    rehash_all();
  } else {
    insert_codes(c);
  }
}

void SimpleLshIndex::remove_row(ClassId c) {
  if (!contains(c)) return;
  erase_codes(c);
  rows_[c].clear();
  norms_[c] = 0.0;
  present_[c] = 0;
  --size_;
}

const SparseVector& SimpleLshIndex::row(ClassId c) const {
  if (!contains(c)) throw Error("simplelsh: class " + std::to_string(c) + " not indexed");
  return rows_[c];
}

std::uint64_t SimpleLshIndex::code(ClassId c, std::size_t table) const {
  if (!contains(c)) throw Error("simplelsh: class " + std::to_string(c) + " not indexed");
  return codes_[c].at(table);
}

std::vector<ClassId> SimpleLshIndex::bucket(std::size_t table, std::uint64_t code) const {
  const auto& map = buckets_.at(table);
  auto it = map.find(code);
  if (it == map.end()) return {};
  return it->second;
}

MipsHit SimpleLshIndex::query(const SparseVector& x, std::optional<ClassId> exclude) const {
  queries_.fetch_add(1, std::memory_order_relaxed);
  const auto codes = query_codes(x);
  std::vector<ClassId> candidates;
  for (std::size_t t = 0; t < params_.tables; ++t) {
    auto it = buckets_[t].find(codes[t]);
    if (it == buckets_[t].end()) continue;
    candidates.insert(candidates.end(), it->second.begin(), it->second.end());
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  if (exclude) {
    candidates.erase(std::remove(candidates.begin(), candidates.end(), *exclude),
                     candidates.end());
  }
  if (candidates.empty()) {
    fallbacks_.fetch_add(1, std::memory_order_relaxed);
    for (std::size_t c = 0; c < rows_.size(); ++c) {
      if (present_[c] && !(exclude && *exclude == c)) {
        candidates.push_back(static_cast<ClassId>(c));
      }
    }
    if (candidates.empty()) {
      throw NoCandidateError("simplelsh: no candidate class after exclusion");
    }
  } else {
    candidates_.fetch_add(candidates.size(), std::memory_order_relaxed);
  }
  MipsHit best{candidates.front(), dot(rows_[candidates.front()], x)};
  for (std::size_t k = 1; k < candidates.size(); ++k) {
    const double s = dot(rows_[candidates[k]], x);
    if (s > best.score) best = {candidates[k], s};
  }
  return best;
}

void SimpleLshIndex::reset_stats() noexcept {
  queries_ = 0;
  fallbacks_ = 0;
  candidates_ = 0;
}

}  // namespace memoir

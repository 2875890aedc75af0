#pragma once

#include <atomic>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "memoir/mips.hpp"

namespace memoir {

/// Maps a data row w with ||w|| <= U to the unit vector
/// [w/U ; sqrt(1 - ||w/U||^2)] in R^{d+1}. U == 0 maps every row to the last
/// basis vector. Throws when ||w|| > U (beyond rounding).
std::vector<double> simplelsh_transform(const SparseVector& w, double max_norm);

/// Maps a query x to [x/||x|| ; 0]. The zero vector maps to zero.
std::vector<double> simplelsh_query_transform(const SparseVector& x);

/// Sign-projection hash: bit k is set when planes_k . z >= 0. `planes` holds
/// `bits` consecutive rows of length z.size().
std::uint64_t hash_code(std::span<const double> z, std::span<const double> planes,
                        std::size_t bits);

/// Hashing quality rho(c, S) = log(1 - cos(S)/pi) / log(1 - cos(cS)/pi),
/// evaluated as printed. Diagnostic only: the textbook SimpleLSH analysis
/// uses arccos of the similarity rather than cos. Requires 0 < c < 1,
/// S > 0 and cos(cS) != 0.
double hashing_quality(double c, double similarity);

/// Deterministic standard normal variate addressed by (seed, plane, coord).
double plane_gaussian(std::uint64_t seed, std::uint64_t plane, std::uint64_t coord);

/// SimpleLSH MIPS index: L tables of K-bit sign-projection codes over the
/// augmented rows. A query takes the union of its L buckets, re-scores the
/// candidates exactly and falls back to a full scan when no candidate is
/// left.
class SimpleLshIndex final : public MipsIndex {
 public:
  SimpleLshIndex(std::size_t dim, const LshParams& params, std::uint64_t seed);

  /// Builds over all rows at once with U set to the largest row norm.
  void build(std::span<const std::pair<ClassId, SparseVector>> rows);

  MipsBackend backend() const noexcept override { return MipsBackend::simple_lsh; }
  std::size_t dim() const noexcept override { return dim_; }
  std::size_t size() const noexcept override { return size_; }
  bool contains(ClassId c) const noexcept override {
    return c < present_.size() && present_[c] != 0;
  }

  MipsHit query(const SparseVector& x,
                std::optional<ClassId> exclude = std::nullopt) const override;
  void update_row(ClassId c, const SparseVector& row) override;
  void remove_row(ClassId c) override;
  const SparseVector& row(ClassId c) const override;

  double max_norm() const noexcept { return max_norm_; }
  std::size_t bits() const noexcept { return params_.bits; }
  std::size_t tables() const noexcept { return params_.tables; }
  std::uint64_t seed() const noexcept { return seed_; }

  /// Stored code of row c in `table`.
  std::uint64_t code(ClassId c, std::size_t table) const;
  /// Bucket of `code` in `table` (empty when absent).
  std::vector<ClassId> bucket(std::size_t table, std::uint64_t code) const;
  /// Coordinate `coord` (0..dim) of hyperplane `bit` of `table`.
  double plane(std::size_t table, std::size_t bit, std::size_t coord) const;

  /// Query codes, one per table.
  std::vector<std::uint64_t> query_codes(const SparseVector& x) const;

  std::uint64_t query_count() const noexcept { return queries_.load(); }
  std::uint64_t fallback_count() const noexcept { return fallbacks_.load(); }
  std::uint64_t candidate_count() const noexcept { return candidates_.load(); }
  std::size_t rebuild_count() const noexcept { return rebuilds_; }
  void reset_stats() noexcept;

 private:
  /// Projections of `v` onto every hyperplane, tail coordinate excluded.
  void project(const SparseVector& v, std::vector<double>& acc) const;
  std::vector<std::uint64_t> row_codes(const SparseVector& row) const;
  void insert_codes(ClassId c);
  void erase_codes(ClassId c);
  void rehash_all();

  std::size_t dim_;
  LshParams params_;
  std::uint64_t seed_;
  std::size_t planes_per_coord_;
  std::vector<double> dense_planes_;  // [coord][table * bits + bit], empty when generated lazily

  double max_norm_ = 0.0;
  std::size_t size_ = 0;
  std::vector<SparseVector> rows_;
  std::vector<double> norms_;
  std::vector<char> present_;
  std::vector<std::vector<std::uint64_t>> codes_;  // [class][table]
  std::vector<std::unordered_map<std::uint64_t, std::vector<ClassId>>> buckets_;
  std::size_t rebuilds_ = 0;

  mutable std::atomic<std::uint64_t> queries_{0};
  mutable std::atomic<std::uint64_t> fallbacks_{0};
  mutable std::atomic<std::uint64_t> candidates_{0};
};

}  // namespace memoir

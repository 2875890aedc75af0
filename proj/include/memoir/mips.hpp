#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "memoir/sparse_vector.hpp"

namespace memoir {

class WeightMatrix;

enum class MipsBackend { exact, simple_lsh, sw_graph };

std::string to_string(MipsBackend backend);
/// Accepts "exact", "simplelsh" and "swgraph".
MipsBackend parse_backend(const std::string& name);

struct LshParams {
  std::size_t bits = 64;    ///< K, bits per hash code (at most 64)
  std::size_t tables = 32;  ///< L
  /// When a row outgrows the normalisation constant U, U is reset to
  /// headroom * (largest row norm) and every row is rehashed.
  double norm_headroom = 1.5;
};

struct SwGraphParams {
  std::size_t max_neighbors = 16;  ///< M
  std::size_t ef_construction = 100;
  std::size_t ef_search = 64;
  std::size_t entry_points = 4;
};

struct MipsParams {
  MipsBackend backend = MipsBackend::exact;
  std::uint64_t seed = 1;
  LshParams lsh;
  SwGraphParams swg;
};

struct MipsHit {
  ClassId id = 0;
  double score = 0.0;
};

/// Incremental maximum-inner-product index over class rows.
///
/// Queries are const and may run concurrently; update_row/remove_row are
/// exclusive. After update_row(c, r) the next query sees r.
class MipsIndex {
 public:
  virtual ~MipsIndex() = default;

  virtual MipsBackend backend() const noexcept = 0;
  virtual std::size_t dim() const noexcept = 0;
  virtual std::size_t size() const noexcept = 0;
  virtual bool contains(ClassId c) const noexcept = 0;

  /// Approximate argmax over indexed rows of row^T x, skipping `exclude`.
  /// The returned score is the exact inner product with the index's copy of
  /// the row. Ties resolve to the smallest class id where the backend
  /// compares them. Throws NoCandidateError when nothing remains.
  virtual MipsHit query(const SparseVector& x,
                        std::optional<ClassId> exclude = std::nullopt) const = 0;

  /// Inserts or replaces row c.
  virtual void update_row(ClassId c, const SparseVector& row) = 0;
  virtual void remove_row(ClassId c) = 0;

  /// Copy of the indexed row c.
  virtual const SparseVector& row(ClassId c) const = 0;
};

/// Builds an index over exactly the given rows. Throws on duplicate ids or
/// mismatched dims. Deterministic for a fixed params.seed.
std::unique_ptr<MipsIndex> build_index(
    std::span<const std::pair<ClassId, SparseVector>> rows, std::size_t dim,
    const MipsParams& params);

/// Builds an index over every class row of W. With `stored` the unscaled
/// rows are indexed, which preserves every argmax while the multiplier
/// changes.
std::unique_ptr<MipsIndex> build_index(const WeightMatrix& w, const MipsParams& params,
                                       bool stored = false);

}  // namespace memoir

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "memoir/mips.hpp"

namespace memoir {

/// Navigable small-world proximity graph over class rows with inner product
/// as the (non-metric) similarity.
///
/// Links are undirected, never self-referencing, and each node keeps at most
/// M of them. Pruning and deletion only drop a link when the two endpoints
/// stay connected, so the graph over inserted nodes is always connected.
class SwGraphIndex final : public MipsIndex {
 public:
  SwGraphIndex(std::size_t dim, const SwGraphParams& params, std::uint64_t seed);

  MipsBackend backend() const noexcept override { return MipsBackend::sw_graph; }
  std::size_t dim() const noexcept override { return dim_; }
  std::size_t size() const noexcept override { return size_; }
  bool contains(ClassId c) const noexcept override {
    return c < nodes_.size() && nodes_[c].present;
  }

  MipsHit query(const SparseVector& x,
                std::optional<ClassId> exclude = std::nullopt) const override;
  void update_row(ClassId c, const SparseVector& row) override;
  void remove_row(ClassId c) override;
  const SparseVector& row(ClassId c) const override;

  /// Search with an explicit candidate-list size.
  MipsHit query(const SparseVector& x, std::optional<ClassId> exclude,
                std::size_t ef) const;

  const std::vector<ClassId>& neighbors(ClassId c) const;
  const std::vector<ClassId>& entry_points() const noexcept { return entry_points_; }
  const SwGraphParams& params() const noexcept { return params_; }
  void set_ef_search(std::size_t ef) noexcept { params_.ef_search = ef; }

  /// True when every inserted node is reachable from every other.
  bool is_connected() const;

 private:
  struct Node {
    bool present = false;
    SparseVector row;
    std::vector<ClassId> links;
  };

  struct Scored {
    double sim;
    ClassId id;
  };

  /// Best-first search returning up to `ef` nodes (excluding `exclude`)
  /// sorted by decreasing similarity, ties by increasing id.
  std::vector<Scored> search(const SparseVector& x, std::optional<ClassId> exclude,
                             std::size_t ef) const;
  void insert(ClassId c);
  void link(ClassId a, ClassId b);
  void unlink(ClassId a, ClassId b);
  bool linked(ClassId a, ClassId b) const;
  /// True when `to` is reachable from `from` through current links.
  bool reachable(ClassId from, ClassId to) const;
  void prune(ClassId c);
  void refresh_entry_points();
  double similarity(ClassId a, ClassId b) const;

  std::size_t dim_;
  SwGraphParams params_;
  std::mt19937_64 rng_;
  std::size_t size_ = 0;
  std::vector<Node> nodes_;
  std::vector<ClassId> entry_points_;
};

}  // namespace memoir

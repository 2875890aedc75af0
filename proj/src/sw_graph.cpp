#include "memoir/sw_graph.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <queue>
#include <string>

#include "memoir/error.hpp"

namespace memoir {
namespace {

// Orders by decreasing similarity, then increasing id.
template <typename S>
bool better(const S& a, const S& b) {
  return a.sim > b.sim || (a.sim == b.sim && a.id < b.id);
}

}  // namespace

SwGraphIndex::SwGraphIndex(std::size_t dim, const SwGraphParams& params, std::uint64_t seed)
    : dim_(dim), params_(params), rng_(seed) {
  if (params_.max_neighbors == 0) throw ConfigError("swgraph: M must be positive");
  if (params_.ef_construction == 0 || params_.ef_search == 0) {
    throw ConfigError("swgraph: ef parameters must be positive");
  }
  if (params_.entry_points == 0) throw ConfigError("swgraph: need at least one entry point");
}

double SwGraphIndex::similarity(ClassId a, ClassId b) const {
  return dot(nodes_[a].row, nodes_[b].row);
}

const SparseVector& SwGraphIndex::row(ClassId c) const {
  if (!contains(c)) throw Error("swgraph: class " + std::to_string(c) + " not indexed");
  return nodes_[c].row;
}

const std::vector<ClassId>& SwGraphIndex::neighbors(ClassId c) const {
  if (!contains(c)) throw Error("swgraph: class " + std::to_string(c) + " not indexed");
  return nodes_[c].links;
}

bool SwGraphIndex::linked(ClassId a, ClassId b) const {
  const auto& l = nodes_[a].links;
  return std::find(l.begin(), l.end(), b) != l.end();
}

void SwGraphIndex::link(ClassId a, ClassId b) {
  if (a == b || linked(a, b)) return;
  nodes_[a].links.push_back(b);
  nodes_[b].links.push_back(a);
}

void SwGraphIndex::unlink(ClassId a, ClassId b) {
  auto drop = [](std::vector<ClassId>& l, ClassId v) {
    l.erase(std::remove(l.begin(), l.end(), v), l.end());
  };
  drop(nodes_[a].links, b);
  drop(nodes_[b].links, a);
}

bool SwGraphIndex::reachable(ClassId from, ClassId to) const {
  if (from == to) return true;
  std::vector<char> seen(nodes_.size(), 0);
  std::deque<ClassId> frontier{from};
  seen[from] = 1;
  while (!frontier.empty()) {
    const ClassId cur = frontier.front();
    frontier.pop_front();
    for (ClassId nb : nodes_[cur].links) {
      if (nb == to) return true;
      if (!seen[nb]) {
        seen[nb] = 1;
        frontier.push_back(nb);
      }
    }
  }
  return false;
}

bool SwGraphIndex::is_connected() const {
  if (size_ <= 1) return true;
  ClassId start = 0;
  while (!nodes_[start].present) ++start;
  std::vector<char> seen(nodes_.size(), 0);
  std::deque<ClassId> frontier{start};
  seen[start] = 1;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    const ClassId cur = frontier.front();
    frontier.pop_front();
    for (ClassId nb : nodes_[cur].links) {
      if (!seen[nb]) {
        seen[nb] = 1;
        ++reached;
        frontier.push_back(nb);
      }
    }
  }
  return reached == size_;
}

void SwGraphIndex::prune(ClassId start) {
  std::vector<ClassId> work{start};
  // Each relink pushes a bridge one hop outward; the cap only guards
  // against a pathological cycle.
  std::size_t budget = 8 * (size_ + 1) * params_.max_neighbors;
  while (!work.empty() && budget-- > 0) {
    const ClassId c = work.back();
    work.pop_back();
    while (nodes_[c].links.size() > params_.max_neighbors) {
      std::vector<Scored> order;
      order.reserve(nodes_[c].links.size());
      for (ClassId nb : nodes_[c].links) order.push_back({similarity(c, nb), nb});
      std::sort(order.begin(), order.end(),
                [](const Scored& a, const Scored& b) { return better(b, a); });
      bool dropped = false;
      for (const Scored& cand : order) {
        unlink(c, cand.id);
        if (reachable(cand.id, c)) {
          dropped = true;
          break;
        }
        link(c, cand.id);
      }
      if (dropped) continue;
      // Every link of c is a bridge: hand the weakest neighbour over to the
      // remaining neighbour most similar to it.
      const ClassId orphan = order.front().id;
      unlink(c, orphan);
      ClassId host = nodes_[c].links.front();
      Scored best{-std::numeric_limits<double>::infinity(), host};
      bool best_has_room = false;
      for (ClassId r : nodes_[c].links) {
        const Scored s{similarity(orphan, r), r};
        const bool room = nodes_[r].links.size() < params_.max_neighbors;
        if ((room && !best_has_room) || (room == best_has_room && better(s, best))) {
          best = s;
          best_has_room = room;
        }
      }
      host = best.id;
      link(orphan, host);
      if (nodes_[host].links.size() > params_.max_neighbors) work.push_back(host);
    }
  }
}

void SwGraphIndex::refresh_entry_points() {
  entry_points_.erase(std::remove_if(entry_points_.begin(), entry_points_.end(),
                                     [&](ClassId c) { return !contains(c); }),
                      entry_points_.end());
  const std::size_t want = std::min(params_.entry_points, size_);
  if (entry_points_.size() >= want) return;
  std::vector<ClassId> pool;
  for (std::size_t c = 0; c < nodes_.size(); ++c) {
    const auto id = static_cast<ClassId>(c);
    if (nodes_[c].present &&
        std::find(entry_points_.begin(), entry_points_.end(), id) == entry_points_.end()) {
      pool.push_back(id);
    }
  }
  while (entry_points_.size() < want && !pool.empty()) {
    const std::size_t k = static_cast<std::size_t>(rng_() % pool.size());
    entry_points_.push_back(pool[k]);
    pool[k] = pool.back();
    pool.pop_back();
  }
}

std::vector<SwGraphIndex::Scored> SwGraphIndex::search(const SparseVector& x,
                                                       std::optional<ClassId> exclude,
                                                       std::size_t ef) const {
  std::vector<Scored> out;
  if (size_ == 0) return out;
  auto worse_first = [](const Scored& a, const Scored& b) { return better(a, b); };
  auto best_first = [](const Scored& a, const Scored& b) { return better(b, a); };
  std::priority_queue<Scored, std::vector<Scored>, decltype(best_first)> candidates(best_first);
  std::priority_queue<Scored, std::vector<Scored>, decltype(worse_first)> results(worse_first);
  std::vector<char> visited(nodes_.size(), 0);

  auto offer = [&](ClassId id) {
    visited[id] = 1;
    const Scored s{dot(nodes_[id].row, x), id};
    if (results.size() >= ef && !better(s, results.top())) return;
    candidates.push(s);
    if (exclude && *exclude == id) return;
    results.push(s);
    if (results.size() > ef) results.pop();
  };

  for (ClassId e : entry_points_) {
    if (!visited[e]) offer(e);
  }
  while (!candidates.empty()) {
    const Scored cur = candidates.top();
    candidates.pop();
    if (results.size() >= ef && better(results.top(), cur)) break;
    for (ClassId nb : nodes_[cur.id].links) {
      if (!visited[nb]) offer(nb);
    }
  }
  out.reserve(results.size());
  while (!results.empty()) {
    out.push_back(results.top());
    results.pop();
  }
  std::reverse(out.begin(), out.end());
  return out;
}

MipsHit SwGraphIndex::query(const SparseVector& x, std::optional<ClassId> exclude) const {
  return query(x, exclude, params_.ef_search);
}

MipsHit SwGraphIndex::query(const SparseVector& x, std::optional<ClassId> exclude,
                            std::size_t ef) const {
  if (x.dim() != dim_) throw DimensionError("swgraph: query dimension mismatch");
  const std::size_t excluded = (exclude && contains(*exclude)) ? 1 : 0;
  if (size_ - excluded == 0) {
    throw NoCandidateError("swgraph: no candidate class after exclusion");
  }
  const auto found = search(x, exclude, std::max<std::size_t>(ef, 1));
  if (!found.empty()) return {found.front().id, found.front().sim};
  // Unreachable for a connected graph; scan to stay correct regardless.
  MipsHit best;
  bool any = false;
  for (std::size_t c = 0; c < nodes_.size(); ++c) {
    if (!nodes_[c].present || (exclude && *exclude == c)) continue;
    const double s = dot(nodes_[c].row, x);
    if (!any || s > best.score) {
      best = {static_cast<ClassId>(c), s};
      any = true;
    }
  }
  return best;
}

void SwGraphIndex::insert(ClassId c) {
  if (size_ > 1) {
    const auto found = search(nodes_[c].row, c, params_.ef_construction);
    const std::size_t take = std::min(found.size(), params_.max_neighbors);
    for (std::size_t k = 0; k < take; ++k) link(c, found[k].id);
    for (std::size_t k = 0; k < take; ++k) {
      if (nodes_[found[k].id].links.size() > params_.max_neighbors) prune(found[k].id);
    }
  }
  refresh_entry_points();
}

void SwGraphIndex::update_row(ClassId c, const SparseVector& row) {
  if (row.dim() != dim_) throw DimensionError("swgraph: row dimension mismatch");
  if (contains(c)) remove_row(c);
  if (c >= nodes_.size()) nodes_.resize(static_cast<std::size_t>(c) + 1);
  nodes_[c].present = true;
  nodes_[c].row = row;
  nodes_[c].links.clear();
  ++size_;
  insert(c);
}

void SwGraphIndex::remove_row(ClassId c) {
  if (!contains(c)) return;
  const std::vector<ClassId> former = nodes_[c].links;
  for (ClassId nb : former) unlink(c, nb);
  nodes_[c].present = false;
  nodes_[c].row.clear();
  nodes_[c].links.clear();
  --size_;
  for (std::size_t i = 0; i < former.size(); ++i) {
    for (std::size_t j = i + 1; j < former.size(); ++j) link(former[i], former[j]);
  }
  for (ClassId nb : former) {
    if (nodes_[nb].links.size() > params_.max_neighbors) prune(nb);
  }
  refresh_entry_points();
}

}  // namespace memoir

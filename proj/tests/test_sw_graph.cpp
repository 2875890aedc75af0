#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "memoir/exact_index.hpp"
#include "memoir/sw_graph.hpp"
#include "test_util.hpp"

using namespace memoir;

namespace {

using Rows = std::vector<std::pair<ClassId, SparseVector>>;

Rows unit_rows(std::size_t n, std::size_t dim, std::mt19937_64& rng) {
  Rows rows;
  for (ClassId c = 0; c < n; ++c) rows.emplace_back(c, testutil::random_unit(dim, rng));
  return rows;
}

void check_structure(const SwGraphIndex& g, std::size_t n) {
  CHECK(g.is_connected());
  for (ClassId c = 0; c < n; ++c) {
    if (!g.contains(c)) continue;
    const auto& nb = g.neighbors(c);
    CHECK(nb.size() <= g.params().max_neighbors);
    for (ClassId o : nb) {
      CHECK(o != c);
      CHECK(g.contains(o));
      const auto& back = g.neighbors(o);
      CHECK(std::find(back.begin(), back.end(), c) != back.end());
    }
  }
}

}  // namespace

TEST_CASE("graph stays connected, symmetric and degree bounded") {
  std::mt19937_64 rng(10);
  SwGraphParams p;
  p.max_neighbors = 6;
  p.ef_construction = 20;
  SwGraphIndex g(16, p, 3);
  const Rows rows = unit_rows(300, 16, rng);
  for (const auto& [c, r] : rows) g.update_row(c, r);
  check_structure(g, 300);

  std::uniform_int_distribution<ClassId> pick(0, 299);
  for (int k = 0; k < 150; ++k) {
    const ClassId c = pick(rng);
    if (k % 3 == 0) {
      if (g.contains(c)) g.remove_row(c);
    } else {
      g.update_row(c, testutil::random_unit(16, rng));
    }
  }
  check_structure(g, 300);
}

TEST_CASE("exclusion is honoured") {
  std::mt19937_64 rng(11);
  SwGraphIndex g(8, {}, 1);
  const Rows rows = unit_rows(60, 8, rng);
  for (const auto& [c, r] : rows) g.update_row(c, r);
  for (const auto& [c, r] : rows) {
    CHECK(g.query(r, c).id != c);
    CHECK(g.query(r).id == c);
  }
}

TEST_CASE("recall@1 does not decrease with ef_search") {
  std::mt19937_64 rng(12);
  SwGraphParams p;
  p.entry_points = 1;
  SwGraphIndex g(24, p, 5);
  ExactIndex exact(24);
  const Rows rows = unit_rows(1500, 24, rng);
  for (const auto& [c, r] : rows) {
    g.update_row(c, r);
    exact.update_row(c, r);
  }
  std::vector<SparseVector> queries;
  for (int k = 0; k < 300; ++k) queries.push_back(testutil::random_unit(24, rng));
  std::vector<double> recalls;
  for (std::size_t ef : {1, 8, 64}) {
    std::size_t hits = 0;
    for (const auto& q : queries) {
      if (g.query(q, std::nullopt, ef).score >= exact.query(q).score) ++hits;
    }
    recalls.push_back(static_cast<double>(hits) / queries.size());
  }
  CHECK(recalls[0] <= recalls[1]);
  CHECK(recalls[1] <= recalls[2]);
  CHECK(recalls[2] >= 0.9);
}

TEST_CASE("fixed seed gives identical graphs and answers") {
  std::mt19937_64 rng(13);
  const Rows rows = unit_rows(200, 10, rng);
  SwGraphIndex a(10, {}, 77), b(10, {}, 77);
  for (const auto& [c, r] : rows) {
    a.update_row(c, r);
    b.update_row(c, r);
  }
  for (ClassId c = 0; c < 200; ++c) CHECK(a.neighbors(c) == b.neighbors(c));
  CHECK(a.entry_points() == b.entry_points());
  for (int k = 0; k < 50; ++k) {
    const auto q = testutil::random_unit(10, rng);
    CHECK(a.query(q).id == b.query(q).id);
  }
}

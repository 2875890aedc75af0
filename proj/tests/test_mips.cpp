#include <doctest.h>

#include <random>
#include <vector>

#include "memoir/error.hpp"
#include "memoir/exact_index.hpp"
#include "memoir/mips.hpp"
#include "memoir/weight_matrix.hpp"
#include "test_util.hpp"

using namespace memoir;

namespace {

using Rows = std::vector<std::pair<ClassId, SparseVector>>;

MipsHit naive(const Rows& rows, const SparseVector& x, std::optional<ClassId> exclude) {
  bool found = false;
  MipsHit best;
  for (const auto& [c, r] : rows) {
    if (exclude && *exclude == c) continue;
    const double s = dot(r, x);
    if (!found || s > best.score || (s == best.score && c < best.id)) {
      best = {c, s};
      found = true;
    }
  }
  if (!found) throw NoCandidateError("naive: empty");
  return best;
}

Rows hand_rows() {
  return {{0, SparseVector(2, {0}, {1.0})},
          {1, SparseVector(2, {1}, {1.0})},
          {2, SparseVector(2, {0, 1}, {0.5, 0.5})}};
}

MipsParams params_for(MipsBackend b) {
  MipsParams p;
  p.backend = b;
  p.seed = 9;
  return p;
}

}  // namespace

TEST_CASE("backend names round-trip") {
  for (auto b : {MipsBackend::exact, MipsBackend::simple_lsh, MipsBackend::sw_graph}) {
    CHECK(parse_backend(to_string(b)) == b);
  }
  CHECK_THROWS_AS(parse_backend("faiss"), ConfigError);
}

TEST_CASE("empty index and exhausted exclusion raise no-candidate") {
  for (auto b : {MipsBackend::exact, MipsBackend::simple_lsh, MipsBackend::sw_graph}) {
    const auto empty = build_index(Rows{}, 2, params_for(b));
    CHECK_THROWS_AS(empty->query(SparseVector(2, {0}, {1.0})), NoCandidateError);
    const Rows one = {{0, SparseVector(2, {0}, {1.0})}};
    const auto single = build_index(one, 2, params_for(b));
    CHECK_THROWS_AS(single->query(SparseVector(2, {0}, {1.0}), ClassId{0}), NoCandidateError);
  }
}

TEST_CASE("hand example: exclude class 0 gives class 2 with score 0.5") {
  for (auto b : {MipsBackend::exact, MipsBackend::simple_lsh, MipsBackend::sw_graph}) {
    const auto idx = build_index(hand_rows(), 2, params_for(b));
    const MipsHit h = idx->query(SparseVector(2, {0}, {1.0}), ClassId{0});
    CHECK(h.id == 2);
    CHECK(h.score == 0.5);
  }
}

TEST_CASE("two classes: the other one is always returned") {
  std::mt19937_64 rng(1);
  for (auto b : {MipsBackend::exact, MipsBackend::simple_lsh, MipsBackend::sw_graph}) {
    const Rows rows = {{0, testutil::random_sparse(8, 4, rng)}, {1, testutil::random_sparse(8, 4, rng)}};
    const auto idx = build_index(rows, 8, params_for(b));
    for (int k = 0; k < 50; ++k) {
      const auto x = testutil::random_sparse(8, 5, rng);
      CHECK(idx->query(x, ClassId{0}).id == 1);
      CHECK(idx->query(x, ClassId{1}).id == 0);
    }
  }
}

TEST_CASE("build rejects duplicate ids and wrong dims") {
  Rows dup = {{0, SparseVector(2)}, {0, SparseVector(2)}};
  CHECK_THROWS(build_index(dup, 2, params_for(MipsBackend::exact)));
  Rows bad = {{0, SparseVector(3)}};
  CHECK_THROWS_AS(build_index(bad, 2, params_for(MipsBackend::exact)), DimensionError);
}

TEST_CASE("exact backend equals the naive loop, ties to the smallest id") {
  std::mt19937_64 rng(77);
  Rows rows;
  for (ClassId c = 0; c < 100; ++c) rows.emplace_back(c, testutil::random_sparse(20, 6, rng));
  rows.emplace_back(100, rows[3].second);  // exact tie with class 3
  const auto idx = build_index(rows, 20, params_for(MipsBackend::exact));
  std::uniform_int_distribution<ClassId> cls(0, 100);
  for (int k = 0; k < 100; ++k) {
    const auto x = testutil::random_sparse(20, 8, rng);
    const std::optional<ClassId> ex = k % 3 ? std::optional<ClassId>(cls(rng)) : std::nullopt;
    const MipsHit a = idx->query(x, ex);
    const MipsHit b = naive(rows, x, ex);
    CHECK(a.id == b.id);
    CHECK(a.score == b.score);
  }
  const MipsHit self = idx->query(rows[3].second);
  CHECK(self.id == naive(rows, rows[3].second, std::nullopt).id);
}

TEST_CASE("exact backend tracks interleaved updates") {
  std::mt19937_64 rng(8);
  Rows rows;
  for (ClassId c = 0; c < 30; ++c) rows.emplace_back(c, testutil::random_sparse(12, 4, rng));
  const auto idx = build_index(rows, 12, params_for(MipsBackend::exact));
  std::uniform_int_distribution<ClassId> cls(0, 29);
  for (int k = 0; k < 500; ++k) {
    if (k % 2) {
      const ClassId c = cls(rng);
      rows[c].second = testutil::random_sparse(12, 1 + k % 7, rng);
      idx->update_row(c, rows[c].second);
    } else {
      const auto x = testutil::random_sparse(12, 5, rng);
      const ClassId ex = cls(rng);
      const MipsHit a = idx->query(x, ex);
      const MipsHit b = naive(rows, x, ex);
      CHECK(a.id == b.id);
      CHECK(a.score == b.score);
    }
  }
}

TEST_CASE("self retrieval and idempotent updates") {
  std::mt19937_64 rng(4);
  Rows rows;
  for (ClassId c = 0; c < 10; ++c) rows.emplace_back(c, testutil::random_unit(6, rng));
  const auto idx = build_index(rows, 6, params_for(MipsBackend::exact));
  const SparseVector big = SparseVector(6, {0, 1}, {5.0, 5.0});
  idx->update_row(4, big);
  CHECK(idx->query(big).id == 4);
  const auto x = testutil::random_sparse(6, 6, rng);
  const MipsHit before = idx->query(x);
  idx->update_row(4, big);
  const MipsHit after = idx->query(x);
  CHECK(before.id == after.id);
  CHECK(before.score == after.score);
}

TEST_CASE("removal excludes a class from results") {
  const auto idx = build_index(hand_rows(), 2, params_for(MipsBackend::exact));
  idx->remove_row(0);
  CHECK_FALSE(idx->contains(0));
  CHECK(idx->size() == 2);
  CHECK(idx->query(SparseVector(2, {0}, {1.0})).id == 2);
}

TEST_CASE("index over a weight matrix uses logical or stored rows") {
  WeightMatrix w(3, 2);
  w.set_row(0, SparseVector(2, {0}, {1.0}));
  w.set_row(1, SparseVector(2, {1}, {2.0}));
  w.global_scale(0.25);
  const auto logical = build_index(w, params_for(MipsBackend::exact));
  const auto stored = build_index(w, params_for(MipsBackend::exact), true);
  const SparseVector x(2, {1}, {1.0});
  CHECK(logical->query(x).id == 1);
  CHECK(logical->query(x).score == 0.5);
  CHECK(stored->query(x).id == 1);
  CHECK(stored->query(x).score == 2.0);
}

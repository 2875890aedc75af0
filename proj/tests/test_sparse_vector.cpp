#include <doctest.h>

#include <random>

#include "memoir/error.hpp"
#include "memoir/sparse_vector.hpp"
#include "test_util.hpp"

using namespace memoir;

TEST_CASE("dot of disjoint supports is zero") {
  const SparseVector a(2, {0}, {1.0});
  const SparseVector b(2, {1}, {1.0});
  CHECK(dot(a, b) == 0.0);
}

TEST_CASE("dot hand example") {
  const SparseVector a(4, {0, 3}, {2.0, 1.0});
  const SparseVector b(4, {0, 3}, {0.5, 4.0});
  CHECK(dot(a, b) == 5.0);
}

TEST_CASE("dot with empty vector") {
  const SparseVector a(1);
  const SparseVector b(1, {0}, {7.0});
  CHECK(dot(a, b) == 0.0);
}

TEST_CASE("dot rejects dimension mismatch") {
  CHECK_THROWS_AS(dot(SparseVector(2), SparseVector(3)), DimensionError);
}

TEST_CASE("constructor validates ordering and bounds") {
  CHECK_THROWS_AS(SparseVector(3, {1, 1}, {1.0, 2.0}), DimensionError);
  CHECK_THROWS_AS(SparseVector(3, {2, 1}, {1.0, 2.0}), DimensionError);
  CHECK_THROWS_AS(SparseVector(3, {3}, {1.0}), DimensionError);
  CHECK_THROWS_AS(SparseVector(3, {0}, {1.0, 2.0}), DimensionError);
  CHECK_THROWS_AS(SparseVector::from_pairs(4, {{1, 1.0}, {1, 2.0}}), DimensionError);
}

TEST_CASE("sparse operations match dense computation") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = testutil::random_sparse(30, 1 + trial % 20, rng);
    const auto b = testutil::random_sparse(30, 1 + (trial * 7) % 25, rng);
    const auto da = a.to_dense();
    const auto db = b.to_dense();
    double ref = 0.0;
    for (std::size_t j = 0; j < 30; ++j) ref += da[j] * db[j];
    CHECK(testutil::close_rel(dot(a, b), ref, 1e-12));
    CHECK(testutil::close_rel(dot(a, db), ref, 1e-12));
    const auto sum = add_scaled(a, -0.7, b).to_dense();
    for (std::size_t j = 0; j < 30; ++j) CHECK(sum[j] == doctest::Approx(da[j] - 0.7 * db[j]));
  }
}

TEST_CASE("purge, truncate_dim and norms") {
  SparseVector v(5, {0, 2, 4}, {3.0, 0.0, -4.0});
  CHECK(v.squared_norm() == 25.0);
  CHECK(v.l1_norm() == 7.0);
  v.purge_zeros();
  CHECK(v.nnz() == 2);
  CHECK(v.at(4) == -4.0);
  CHECK(v.at(2) == 0.0);
  CHECK(v.truncate_dim(3) == 1);
  CHECK(v.dim() == 3);
  CHECK(v.nnz() == 1);
}

#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "memoir/sparse_vector.hpp"

namespace testutil {

inline memoir::SparseVector random_sparse(std::size_t dim, std::size_t nnz, std::mt19937_64& rng,
                                          double lo = -1.0, double hi = 1.0) {
  std::vector<memoir::FeatureId> idx(dim);
  for (std::size_t j = 0; j < dim; ++j) idx[j] = static_cast<memoir::FeatureId>(j);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(std::min(nnz, dim));
  std::sort(idx.begin(), idx.end());
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> val(idx.size());
  for (auto& v : val) {
    do {
      v = u(rng);
    } while (v == 0.0);
  }
  return memoir::SparseVector(dim, std::move(idx), std::move(val));
}

inline memoir::SparseVector random_unit(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<double> v(dim);
  double sq = 0.0;
  for (auto& x : v) {
    x = g(rng);
    sq += x * x;
  }
  for (auto& x : v) x /= std::sqrt(sq);
  return memoir::SparseVector::from_dense(v);
}

inline bool close_rel(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace testutil

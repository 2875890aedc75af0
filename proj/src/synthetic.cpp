#include "memoir/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "memoir/error.hpp"

namespace memoir {

Dataset make_separable_toy(std::size_t per_class, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-std::numbers::pi / 6, std::numbers::pi / 6);
  std::uniform_real_distribution<double> radius(1.0, 2.0);
  Dataset data;
  data.dim = 2;
  data.num_classes = 3;
  for (int c = 0; c < 3; ++c) data.labels.intern(std::to_string(c + 1));
  for (std::size_t i = 0; i < per_class; ++i) {
    for (ClassId c = 0; c < 3; ++c) {
      const double angle = 2.0 * std::numbers::pi * c / 3.0 + jitter(rng);
      const double r = radius(rng);
      const std::vector<double> dense = {r * std::cos(angle), r * std::sin(angle)};
      data.examples.push_back({c, SparseVector::from_dense(dense)});
    }
  }
  return data;
}

namespace {

Dataset empty_like(const SyntheticSpec& spec) {
  Dataset d;
  d.dim = spec.dim;
  d.num_classes = spec.classes;
  for (std::size_t c = 0; c < spec.classes; ++c) d.labels.intern("c" + std::to_string(c));
  return d;
}

}  // namespace

SyntheticSplit make_synthetic(const SyntheticSpec& spec) {
  if (spec.classes < 2 || spec.dim == 0 || spec.prototype_nnz == 0 ||
      spec.prototype_nnz > spec.dim || spec.noise_nnz > spec.dim) {
    throw ConfigError("invalid synthetic dataset shape");
  }
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<FeatureId> all(spec.dim);
  for (std::size_t j = 0; j < spec.dim; ++j) all[j] = static_cast<FeatureId>(j);

  auto pick = [&](std::size_t k) {
    std::vector<FeatureId> pool = all;
    for (std::size_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> u(i, pool.size() - 1);
      std::swap(pool[i], pool[u(rng)]);
    }
    pool.resize(k);
    return pool;
  };

  std::vector<std::vector<double>> prototypes(spec.classes, std::vector<double>(spec.dim, 0.0));
  for (auto& p : prototypes) {
    for (FeatureId j : pick(spec.prototype_nnz)) p[j] = gauss(rng);
  }

  SyntheticSplit out{empty_like(spec), empty_like(spec)};
  std::uniform_int_distribution<std::size_t> label_dist(0, spec.classes - 1);
  const std::size_t total = spec.train_examples + spec.test_examples;
  for (std::size_t i = 0; i < total; ++i) {
    const auto y = static_cast<ClassId>(label_dist(rng));
    std::vector<double> x(spec.dim, 0.0);
    const auto& p = prototypes[y];
    for (std::size_t j = 0; j < spec.dim; ++j) {
      if (p[j] != 0.0) x[j] = p[j] + spec.noise * gauss(rng);
    }
    for (FeatureId j : pick(spec.noise_nnz)) x[j] += spec.noise * gauss(rng);
    double sq = 0.0;
    for (double v : x) sq += v * v;
    if (sq > 0.0) {
      const double inv = 1.0 / std::sqrt(sq);
      for (double& v : x) v *= inv;
    }
    auto& dst = i < spec.train_examples ? out.train : out.test;
    dst.examples.push_back({y, SparseVector::from_dense(x)});
  }
  return out;
}

}  // namespace memoir

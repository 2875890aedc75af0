#pragma once

#include <cstddef>
#include <cstdint>

#include "memoir/dataset.hpp"

namespace memoir {

/// Linearly separable 3-class set in 2-d: class c sits within pi/6 of the
/// direction 2*pi*c/3 at radius [1, 2], so the unit class directions
/// separate it with margin at least sqrt(3)/2.
Dataset make_separable_toy(std::size_t per_class = 20, std::uint64_t seed = 7);

struct SyntheticSpec {
  std::size_t classes = 50;
  std::size_t dim = 100;
  std::size_t train_examples = 5000;
  std::size_t test_examples = 1000;
  /// Features carried by each class prototype.
  std::size_t prototype_nnz = 10;
  /// Random background features added to every example.
  std::size_t noise_nnz = 10;
  double noise = 1.0;
  std::uint64_t seed = 1;
};

struct SyntheticSplit {
  Dataset train;
  Dataset test;
};

/// Sparse prototype-plus-noise classes; every example is unit-normalised.
/// Labels are "c0", "c1", ... with dense id equal to the suffix.
SyntheticSplit make_synthetic(const SyntheticSpec& spec);

}  // namespace memoir

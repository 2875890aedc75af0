#pragma once

#include <cstddef>
#include <vector>

#include "memoir/dataset.hpp"
#include "memoir/weight_matrix.hpp"

namespace memoir {

struct PredictionSet {
  std::vector<ClassId> truth;
  std::vector<ClassId> predicted;
  std::size_t num_classes = 0;
};

enum class F1Convention {
  /// Harmonic mean of macro-precision and macro-recall.
  harmonic_of_macro,
  /// Mean of per-class F1 scores.
  mean_of_per_class,
};

struct EvalReport {
  std::size_t n = 0;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double predict_seconds = 0.0;
};

/// argmax_c omega_c^T x over all classes, ties to the smallest id.
ClassId predict(const WeightMatrix& w, const SparseVector& x);

/// Predicts every example of `data`; `threads` > 1 splits the work.
PredictionSet predict_all(const WeightMatrix& w, const Dataset& data, std::size_t threads = 1);

double accuracy(const PredictionSet& p);

/// Per-class precision with no predicted positives is 0, per-class recall
/// with no true positives is 0, classes absent from both truth and
/// predictions are skipped, and MaP = MaR = 0 gives 0.
double macro_f1(const PredictionSet& p,
                F1Convention convention = F1Convention::harmonic_of_macro);

EvalReport evaluate(const WeightMatrix& w, const Dataset& data, std::size_t threads = 1,
                    F1Convention convention = F1Convention::harmonic_of_macro);

}  // namespace memoir

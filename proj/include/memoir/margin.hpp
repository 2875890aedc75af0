#pragma once

#include "memoir/dataset.hpp"
#include "memoir/mips.hpp"
#include "memoir/weight_matrix.hpp"

namespace memoir {

/// Margin of a labeled example against one competing class.
/// `margin == score_true - score_rival` and `rival != label` always hold.
struct MarginResult {
  double margin = 0.0;
  ClassId rival = 0;
  double score_true = 0.0;
  double score_rival = 0.0;
};

struct RiskReport {
  double rho = 1.0;
  double empirical_hinge = 0.0;  ///< mean hinge rho-loss
  double zero_one = 0.0;         ///< fraction with margin <= 0
};

/// Exact margin: the rival maximises omega_r^T x over r != y, ties to the
/// smallest class id. Throws when C < 2.
MarginResult exact_margin(const WeightMatrix& w, const SparseVector& x, ClassId y);

/// Inexact margin: the rival comes from `index` (queried with y excluded)
/// and both scores are recomputed against W. Never below the exact margin.
MarginResult inexact_margin(const MipsIndex& index, const WeightMatrix& w,
                            const SparseVector& x, ClassId y);

/// (1 - margin / rho)_+ ; rho must be positive.
double hinge_loss(double margin, double rho);

/// Mean hinge rho-loss and 0/1 error over `data`. Uses exact margins when
/// `index` is null, inexact margins from `index` otherwise.
RiskReport empirical_risk(const WeightMatrix& w, const Dataset& data, double rho,
                          const MipsIndex* index = nullptr);

}  // namespace memoir

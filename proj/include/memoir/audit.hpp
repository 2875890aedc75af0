#pragma once

#include <optional>
#include <span>
#include <vector>

#include "memoir/dataset.hpp"
#include "memoir/mips.hpp"
#include "memoir/weight_matrix.hpp"

namespace memoir {

/// counts[k] holds gaps g with upper_edges[k-1] < g <= upper_edges[k]
/// (the first bin holds g <= upper_edges[0]).
struct GapHistogram {
  std::vector<double> upper_edges;
  std::vector<std::size_t> counts;
};

struct AuditReport {
  std::size_t queries = 0;
  double epsilon = 0.0;
  std::size_t exceed_count = 0;
  double delta_hat = 0.0;    ///< fraction of queries with inexact - exact margin > epsilon
  double recall_at_1 = 0.0;  ///< fraction whose rival matches the exact rival's score
  double mean_gap = 0.0;
  double max_gap = 0.0;
  GapHistogram histogram;
};

/// Measures how far the index's margins drift from exact margins over the
/// labeled `queries`. epsilon may be +infinity.
AuditReport audit_inexactness(const MipsIndex& index, const WeightMatrix& w,
                              const Dataset& queries, double epsilon);

/// Fraction of queries for which `approx` returns a row scoring as high as
/// the one `oracle` returns.
double recall_at_1(const MipsIndex& approx, const MipsIndex& oracle,
                   std::span<const SparseVector> queries,
                   std::span<const std::optional<ClassId>> excludes);

}  // namespace memoir

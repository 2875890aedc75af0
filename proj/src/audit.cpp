#include "memoir/audit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "memoir/error.hpp"
#include "memoir/margin.hpp"

namespace memoir {
namespace {

GapHistogram make_histogram(double epsilon) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  GapHistogram h;
  if (epsilon > 0.0 && std::isfinite(epsilon)) {
    h.upper_edges = {0.0, epsilon / 4, epsilon / 2, epsilon, 2 * epsilon, 4 * epsilon, inf};
  } else {
    h.upper_edges = {0.0, 1e-3, 1e-2, 1e-1, 1.0, inf};
  }
  h.counts.assign(h.upper_edges.size(), 0);
  return h;
}

}  // namespace

AuditReport audit_inexactness(const MipsIndex& index, const WeightMatrix& w,
                              const Dataset& queries, double epsilon) {
  if (std::isnan(epsilon) || epsilon < 0.0) throw Error("audit: epsilon must be >= 0");
  AuditReport report;
  report.epsilon = epsilon;
  report.histogram = make_histogram(epsilon);
  std::size_t hits = 0;
  double gap_sum = 0.0;
  for (const auto& ex : queries.examples) {
    const MarginResult exact = exact_margin(w, ex.features, ex.label);
    const MarginResult approx = inexact_margin(index, w, ex.features, ex.label);
    const double gap = approx.margin - exact.margin;
    if (gap > epsilon) ++report.exceed_count;
    if (approx.rival == exact.rival || approx.score_rival >= exact.score_rival) ++hits;
    gap_sum += gap;
    report.max_gap = std::max(report.max_gap, gap);
    const auto& edges = report.histogram.upper_edges;
    const auto bin = static_cast<std::size_t>(
        std::lower_bound(edges.begin(), edges.end(), gap) - edges.begin());
    ++report.histogram.counts[std::min(bin, edges.size() - 1)];
    ++report.queries;
  }
  if (report.queries > 0) {
    const auto n = static_cast<double>(report.queries);
    report.delta_hat = static_cast<double>(report.exceed_count) / n;
    report.recall_at_1 = static_cast<double>(hits) / n;
    report.mean_gap = gap_sum / n;
  }
  return report;
}

double recall_at_1(const MipsIndex& approx, const MipsIndex& oracle,
                   std::span<const SparseVector> queries,
                   std::span<const std::optional<ClassId>> excludes) {
  if (queries.size() != excludes.size()) throw Error("recall_at_1: length mismatch");
  if (queries.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < queries.size(); ++k) {
    const MipsHit a = approx.query(queries[k], excludes[k]);
    const MipsHit o = oracle.query(queries[k], excludes[k]);
    if (a.id == o.id || a.score >= o.score) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(queries.size());
}

}  // namespace memoir

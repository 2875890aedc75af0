#include "memoir/margin.hpp"

#include <algorithm>
#include <string>

#include "memoir/error.hpp"

namespace memoir {

MarginResult exact_margin(const WeightMatrix& w, const SparseVector& x, ClassId y) {
  const std::size_t classes = w.num_classes();
  if (classes < 2) throw Error("exact_margin: need at least two classes");
  if (y >= classes) throw Error("exact_margin: label " + std::to_string(y) + " out of range");
  // The shared positive multiplier preserves the argmax, so candidates are
  // compared on stored scores exactly as an index over stored rows would.
  bool found = false;
  ClassId rival = 0;
  double best = 0.0;
  for (std::size_t c = 0; c < classes; ++c) {
    if (c == y) continue;
    const double s = w.stored_dot(static_cast<ClassId>(c), x);
    if (!found || s > best) {
      best = s;
      rival = static_cast<ClassId>(c);
      found = true;
    }
  }
  MarginResult r;
  r.rival = rival;
  r.score_true = w.row_dot(y, x);
  r.score_rival = w.row_dot(rival, x);
  r.margin = r.score_true - r.score_rival;
  return r;
}

MarginResult inexact_margin(const MipsIndex& index, const WeightMatrix& w,
                            const SparseVector& x, ClassId y) {
  if (w.num_classes() < 2) throw Error("inexact_margin: need at least two classes");
  if (y >= w.num_classes()) {
    throw Error("inexact_margin: label " + std::to_string(y) + " out of range");
  }
  const MipsHit hit = index.query(x, y);
  if (hit.id >= w.num_classes()) throw Error("inexact_margin: index returned unknown class");
  MarginResult r;
  r.rival = hit.id;
  r.score_true = w.row_dot(y, x);
  r.score_rival = w.row_dot(hit.id, x);
  r.margin = r.score_true - r.score_rival;
  return r;
}

double hinge_loss(double margin, double rho) {
  if (!(rho > 0.0)) throw Error("hinge_loss: rho must be positive");
  return std::max(0.0, 1.0 - margin / rho);
}

RiskReport empirical_risk(const WeightMatrix& w, const Dataset& data, double rho,
                          const MipsIndex* index) {
  if (data.empty()) throw Error("empirical_risk: empty dataset");
  if (!(rho > 0.0)) throw Error("empirical_risk: rho must be positive");
  double hinge = 0.0;
  std::size_t errors = 0;
  for (const auto& ex : data.examples) {
    const MarginResult m = index ? inexact_margin(*index, w, ex.features, ex.label)
                                 : exact_margin(w, ex.features, ex.label);
    hinge += hinge_loss(m.margin, rho);
    if (m.margin <= 0.0) ++errors;
  }
  const auto n = static_cast<double>(data.size());
  return {rho, hinge / n, static_cast<double>(errors) / n};
}

}  // namespace memoir

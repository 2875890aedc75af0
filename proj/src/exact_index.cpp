#include "memoir/exact_index.hpp"

#include <string>

#include "memoir/error.hpp"

namespace memoir {

MipsHit ExactIndex::query(const SparseVector& x, std::optional<ClassId> exclude) const {
  if (x.dim() != dim_) throw DimensionError("exact index: query dimension mismatch");
  bool found = false;
  MipsHit best;
  for (std::size_t c = 0; c < rows_.size(); ++c) {
    if (!present_[c]) continue;
    if (exclude && *exclude == c) continue;
    const double s = dot(rows_[c], x);
    if (!found || s > best.score) {
      best = {static_cast<ClassId>(c), s};
      found = true;
    }
  }
  if (!found) throw NoCandidateError("exact index: no candidate class after exclusion");
  return best;
}

void ExactIndex::update_row(ClassId c, const SparseVector& row) {
  if (row.dim() != dim_) throw DimensionError("exact index: row dimension mismatch");
  if (c >= rows_.size()) {
    rows_.resize(static_cast<std::size_t>(c) + 1, SparseVector(dim_));
    present_.resize(static_cast<std::size_t>(c) + 1, 0);
  }
  if (!present_[c]) ++size_;
  present_[c] = 1;
  rows_[c] = row;
}

void ExactIndex::remove_row(ClassId c) {
  if (!contains(c)) return;
  present_[c] = 0;
  rows_[c].clear();
  --size_;
}

const SparseVector& ExactIndex::row(ClassId c) const {
  if (!contains(c)) throw Error("exact index: class " + std::to_string(c) + " not indexed");
  return rows_[c];
}

}  // namespace memoir

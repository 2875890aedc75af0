#include "memoir/mips.hpp"

#include <string>

#include "memoir/error.hpp"
#include "memoir/exact_index.hpp"
#include "memoir/simple_lsh.hpp"
#include "memoir/sw_graph.hpp"
#include "memoir/weight_matrix.hpp"

namespace memoir {

std::string to_string(MipsBackend backend) {
  switch (backend) {
    case MipsBackend::exact:
      return "exact";
    case MipsBackend::simple_lsh:
      return "simplelsh";
    case MipsBackend::sw_graph:
      return "swgraph";
  }
  return "unknown";
}

MipsBackend parse_backend(const std::string& name) {
  if (name == "exact") return MipsBackend::exact;
  if (name == "simplelsh") return MipsBackend::simple_lsh;
  if (name == "swgraph") return MipsBackend::sw_graph;
  throw ConfigError("unknown MIPS backend '" + name + "' (expected exact, simplelsh or swgraph)");
}

std::unique_ptr<MipsIndex> build_index(std::span<const std::pair<ClassId, SparseVector>> rows,
                                       std::size_t dim, const MipsParams& params) {
  std::vector<char> seen;
  for (const auto& [c, row] : rows) {
    if (row.dim() != dim) throw DimensionError("build_index: row dimension mismatch");
    if (c >= seen.size()) seen.resize(static_cast<std::size_t>(c) + 1, 0);
    if (seen[c]) throw Error("build_index: duplicate class id " + std::to_string(c));
    seen[c] = 1;
  }
  switch (params.backend) {
    case MipsBackend::exact: {
      auto index = std::make_unique<ExactIndex>(dim);
      for (const auto& [c, row] : rows) index->update_row(c, row);
      return index;
    }
    case MipsBackend::simple_lsh: {
      auto index = std::make_unique<SimpleLshIndex>(dim, params.lsh, params.seed);
      index->build(rows);
      return index;
    }
    case MipsBackend::sw_graph: {
      auto index = std::make_unique<SwGraphIndex>(dim, params.swg, params.seed);
      for (const auto& [c, row] : rows) index->update_row(c, row);
      return index;
    }
  }
  throw ConfigError("build_index: unknown backend");
}

std::unique_ptr<MipsIndex> build_index(const WeightMatrix& w, const MipsParams& params,
                                       bool stored) {
  std::vector<std::pair<ClassId, SparseVector>> rows;
  rows.reserve(w.num_classes());
  for (std::size_t c = 0; c < w.num_classes(); ++c) {
    const auto id = static_cast<ClassId>(c);
    rows.emplace_back(id, stored ? w.stored_row(id) : w.materialize_row(id));
  }
  return build_index(rows, w.dim(), params);
}

}  // namespace memoir

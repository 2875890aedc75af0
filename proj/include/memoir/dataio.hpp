#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "memoir/dataset.hpp"
#include "memoir/weight_matrix.hpp"

namespace memoir {

struct ParseOptions {
  /// Feature ids in the file start at 0 instead of 1.
  bool zero_based = false;
  /// Forces d; features at or beyond it are dropped and counted.
  std::optional<std::size_t> dim;
  /// Forces C (must cover every label seen).
  std::optional<std::size_t> num_classes;
  /// Starts from an existing label table (e.g. a model's); labels not in it
  /// receive fresh ids after the existing ones.
  const LabelMap* labels = nullptr;
};

/// Parses `label idx:val idx:val ...` lines. Blank lines are skipped.
/// Throws ParseError (with the line number) on malformed tokens, negative
/// or zero-in-1-based indices, duplicate features and non-finite values,
/// and Error("empty dataset") when no example is found.
Dataset parse_dataset(std::istream& in, const ParseOptions& options = {});
Dataset parse_dataset(const std::string& path, const ParseOptions& options = {});

/// Writes in the same format with full round-trip precision.
void write_dataset(std::ostream& out, const Dataset& data, bool zero_based = false);
void write_dataset(const std::string& path, const Dataset& data, bool zero_based = false);

enum class ModelEncoding { text, binary };

struct ModelHeader {
  std::uint32_t format_version = 1;
  std::size_t num_classes = 0;
  std::size_t dim = 0;
  double lambda = 0.0;
  std::string algorithm;
  LabelMap labels;
};

struct Model {
  ModelHeader header;
  WeightMatrix weights;
};

/// Writes the logical rows of `w`. The label table, when non-empty, must
/// have one entry per class.
void save_model(std::ostream& out, const WeightMatrix& w, const ModelHeader& header,
                ModelEncoding encoding);
void save_model(const std::string& path, const WeightMatrix& w, const ModelHeader& header,
                ModelEncoding encoding);

/// Reads either encoding. Throws ModelFormatError on any inconsistency and
/// never returns a partial model.
Model load_model(std::istream& in);
Model load_model(const std::string& path);

}  // namespace memoir

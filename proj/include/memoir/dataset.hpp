#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "memoir/sparse_vector.hpp"

namespace memoir {

/// Bidirectional map between external label strings and dense class ids,
/// assigned in first-seen order.
class LabelMap {
 public:
  LabelMap() = default;
  explicit LabelMap(std::vector<std::string> names);

  /// Returns the id of `name`, assigning the next dense id if unseen.
  ClassId intern(const std::string& name);
  /// Returns true and sets `id` when `name` is known.
  bool find(const std::string& name, ClassId& id) const;
  const std::string& name(ClassId id) const;
  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }

  friend bool operator==(const LabelMap& a, const LabelMap& b) { return a.names_ == b.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, ClassId> ids_;
};

struct Example {
  ClassId label = 0;
  SparseVector features;
};

/// Labeled sparse examples with feature dimension d and class count C.
struct Dataset {
  std::vector<Example> examples;
  std::size_t dim = 0;
  std::size_t num_classes = 0;
  LabelMap labels;
  /// Features dropped because they exceeded a forced dimension.
  std::size_t dropped_features = 0;

  std::size_t size() const noexcept { return examples.size(); }
  bool empty() const noexcept { return examples.empty(); }
};

}  // namespace memoir

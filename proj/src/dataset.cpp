#include "memoir/dataset.hpp"

#include "memoir/error.hpp"

namespace memoir {

LabelMap::LabelMap(std::vector<std::string> names) {
  for (auto& n : names) intern(n);
}

ClassId LabelMap::intern(const std::string& name) {
  auto [it, inserted] = ids_.try_emplace(name, static_cast<ClassId>(names_.size()));
  if (inserted) names_.push_back(name);
  return it->second;
}

bool LabelMap::find(const std::string& name, ClassId& id) const {
  auto it = ids_.find(name);
  if (it == ids_.end()) return false;
  id = it->second;
  return true;
}

const std::string& LabelMap::name(ClassId id) const {
  if (id >= names_.size()) throw Error("unknown class id " + std::to_string(id));
  return names_[id];
}

}  // namespace memoir

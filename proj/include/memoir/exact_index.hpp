#pragma once

#include <vector>

#include "memoir/mips.hpp"

namespace memoir {

/// Brute-force MIPS: a full scan in class-id order. This is the oracle the
/// approximate backends are measured against.
class ExactIndex final : public MipsIndex {
 public:
  explicit ExactIndex(std::size_t dim) : dim_(dim) {}

  MipsBackend backend() const noexcept override { return MipsBackend::exact; }
  std::size_t dim() const noexcept override { return dim_; }
  std::size_t size() const noexcept override { return size_; }
  bool contains(ClassId c) const noexcept override {
    return c < present_.size() && present_[c] != 0;
  }

  MipsHit query(const SparseVector& x,
                std::optional<ClassId> exclude = std::nullopt) const override;
  void update_row(ClassId c, const SparseVector& row) override;
  void remove_row(ClassId c) override;
  const SparseVector& row(ClassId c) const override;

 private:
  std::size_t dim_;
  std::size_t size_ = 0;
  std::vector<SparseVector> rows_;
  std::vector<char> present_;
};

}  // namespace memoir

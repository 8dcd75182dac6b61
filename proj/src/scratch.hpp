#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cinderella::detail {

/// Stack-first buffer for short per-call vectors in hot loops.
class Scratch {
public:
  explicit Scratch(std::size_t n) : size_(n) {
    if (n > kInline) heap_.resize(n);
  }

  std::span<double> span() noexcept { return {data(), size_}; }
  double* data() noexcept { return size_ > kInline ? heap_.data() : inline_; }
  double& operator[](std::size_t i) noexcept { return data()[i]; }

private:
  static constexpr std::size_t kInline = 128;
  double inline_[kInline];
  std::vector<double> heap_;
  std::size_t size_;
};

} // namespace cinderella::detail

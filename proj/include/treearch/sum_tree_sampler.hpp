#pragma once

#include <array>
#include <cassert>
#include <cstddef>
#include <type_traits>
#include <vector>

#include "treearch/random.hpp"

namespace treearch {

// Dynamic discrete distribution over 0..n-1 backed by a B-ary sum tree whose
// sibling groups each fill one 64-byte cache line. set/add/draw are
// O(log n / log B). With an integral Weight draws are exact; with a floating
// Weight they are exact up to rounding of the partial sums.
template <typename Weight>
class SumTreeSampler {
  static_assert(std::is_arithmetic_v<Weight>);
  static constexpr std::size_t kArity = 64 / sizeof(Weight);
  struct alignas(64) Block {
    std::array<Weight, kArity> w{};
  };

 public:
  explicit SumTreeSampler(std::size_t n = 0) : n_(n) {
    std::size_t count = n == 0 ? 1 : n, start = 0;
    do {
      level_start_.push_back(start);
      count = (count + kArity - 1) / kArity;
      start += count;
    } while (count > 1);
    blocks_.resize(start);
  }

  std::size_t size() const noexcept { return n_; }
  Weight total() const noexcept { return total_; }
  Weight weight(std::size_t i) const noexcept { return entry(0, i); }
  bool empty() const noexcept { return total_ <= Weight{0}; }

  void add(std::size_t i, Weight delta) noexcept {
    total_ += delta;
    for (std::size_t level = 0; level < level_start_.size(); ++level, i /= kArity) entry(level, i) += delta;
  }

  void set(std::size_t i, Weight w) noexcept { add(i, w - weight(i)); }

  // Sum of weights of 0..i-1.
  Weight prefix(std::size_t i) const noexcept {
    Weight acc{0};
    for (std::size_t level = 0; level < level_start_.size(); ++level, i /= kArity) {
      const Block& b = blocks_[level_start_[level] + i / kArity];
      for (std::size_t j = 0; j < i % kArity; ++j) acc += b.w[j];
    }
    return acc;
  }

  // Smallest i with prefix(i + 1) > target, for 0 <= target < total().
  std::size_t find(Weight target) const noexcept {
    std::size_t block = 0;
    for (std::size_t level = level_start_.size(); level-- > 0;) {
      const Block& b = blocks_[level_start_[level] + block];
      std::size_t j = 0, last = 0;
      for (; j < kArity; ++j) {
        if (b.w[j] > Weight{0}) last = j;
        if (target < b.w[j]) break;
        target -= b.w[j];
      }
      // Only reachable through rounding with floating weights.
      if (j == kArity) {
        j = last;
        target = Weight{0};
      }
      block = block * kArity + j;
    }
    return block;
  }

  std::size_t draw(Rng& rng) const {
    assert(!empty());
    if constexpr (std::is_integral_v<Weight>) {
      return find(static_cast<Weight>(rng.below(static_cast<std::uint64_t>(total_))));
    } else {
      return find(rng.uniform() * total_);
    }
  }

 private:
  Weight& entry(std::size_t level, std::size_t i) noexcept {
    return blocks_[level_start_[level] + i / kArity].w[i % kArity];
  }
  const Weight& entry(std::size_t level, std::size_t i) const noexcept {
    return blocks_[level_start_[level] + i / kArity].w[i % kArity];
  }

  std::size_t n_;
  std::vector<Block> blocks_;
  std::vector<std::size_t> level_start_;
  Weight total_{0};
};

}  // namespace treearch

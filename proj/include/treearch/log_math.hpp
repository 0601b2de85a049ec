#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace treearch {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)) without overflow; -inf is the additive identity.
inline double log_add_exp(double a, double b) noexcept {
  if (a < b) std::swap(a, b);
  if (b == kNegInf) return a;
  return a + std::log1p(std::exp(b - a));
}

template <typename Range>
double log_sum_exp(const Range& values) {
  double hi = kNegInf;
  for (double v : values) hi = std::max(hi, v);
  if (hi == kNegInf) return kNegInf;
  if (hi == std::numeric_limits<double>::infinity()) return hi;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - hi);
  return hi + std::log(acc);
}

// Table of log(k!) for k = 0..max.
class LogFactorials {
 public:
  explicit LogFactorials(std::size_t max) : table_(max + 1) {
    for (std::size_t k = 0; k <= max; ++k) table_[k] = std::lgamma(static_cast<double>(k) + 1.0);
  }

  double operator()(long long k) const noexcept { return table_[static_cast<std::size_t>(k)]; }

  // log C(n, k); -inf outside 0 <= k <= n.
  double binomial(long long n, long long k) const noexcept {
    if (k < 0 || n < 0 || k > n) return kNegInf;
    return table_[n] - table_[k] - table_[n - k];
  }

  std::size_t max() const noexcept { return table_.size() - 1; }

 private:
  std::vector<double> table_;
};

}  // namespace treearch

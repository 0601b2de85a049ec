#pragma once

#include <boost/math/distributions/chi_squared.hpp>
#include <cstdint>
#include <vector>

namespace treearch::testing {

// p-value of Pearson's chi-square statistic for observed counts against a
// uniform distribution over the cells.
inline double chi_square_uniform_p_value(const std::vector<std::uint64_t>& observed) {
  std::uint64_t total = 0;
  for (auto c : observed) total += c;
  const double expected = static_cast<double>(total) / static_cast<double>(observed.size());
  double stat = 0.0;
  for (auto c : observed) {
    const double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
  }
  if (observed.size() < 2) return 1.0;
  const boost::math::chi_squared dist(static_cast<double>(observed.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

// Same against arbitrary expected probabilities.
inline double chi_square_p_value(const std::vector<std::uint64_t>& observed,
                                 const std::vector<double>& probabilities) {
  std::uint64_t total = 0;
  for (auto c : observed) total += c;
  double stat = 0.0;
  std::size_t cells = 0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    if (probabilities[k] <= 0.0) continue;
    const double expected = probabilities[k] * static_cast<double>(total);
    const double d = static_cast<double>(observed[k]) - expected;
    stat += d * d / expected;
    ++cells;
  }
  if (cells < 2) return 1.0;
  const boost::math::chi_squared dist(static_cast<double>(cells - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace treearch::testing

#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "treearch/history_counts.hpp"
#include "treearch/log_math.hpp"
#include "treearch/tree.hpp"

namespace treearch {

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// P(i, t): fraction of consistent histories in which node i arrives at time
// t, with the seed at t = 0. Rows and columns each sum to one.
struct ArrivalPosterior {
  RowMatrixXd P;
  double log_Z = 0.0;

  NodeId size() const noexcept { return static_cast<NodeId>(P.rows()); }
};

// log g_{i->j}(t) for t = 1..n_{i->j}: the number of histories of j's branch
// in which j arrives strictly before t. Stored densely per directed edge over
// exactly that range; for t > n_{i->j} the count is saturated.
class BranchCumulative {
 public:
  BranchCumulative() = default;
  explicit BranchCumulative(const std::vector<NodeId>& sizes);

  // Element t-1 holds log g(t).
  std::span<double> operator[](std::size_t slot) noexcept {
    return {values_.data() + offset_[slot], values_.data() + offset_[slot + 1]};
  }
  std::span<const double> operator[](std::size_t slot) const noexcept {
    return {values_.data() + offset_[slot], values_.data() + offset_[slot + 1]};
  }
  std::size_t slot_count() const noexcept { return offset_.empty() ? 0 : offset_.size() - 1; }

 private:
  std::vector<std::size_t> offset_;
  std::vector<double> values_;
};

// log h_{i,k->j}: histories of j's branch with both edges (i, j) and (k, j)
// cut, seeded at j. Slots are those of j->i and j->k.
double h_exclude(const Tree& tree, const EdgeLogCounts& counts, const LogFactorials& lf,
                 std::size_t slot_ji, std::size_t slot_jk);
double h_exclude(const Tree& tree, const EdgeLogCounts& counts, const LogFactorials& lf, NodeId i,
                 NodeId k, NodeId j);

BranchCumulative branch_cumulative(const Tree& tree, const EdgeLogCounts& counts,
                                   const LogFactorials& lf);

// Full posterior over arrival times. O(n^2) time and memory.
ArrivalPosterior arrival_posterior(const Tree& tree);

Eigen::VectorXd posterior_mean_times(const ArrivalPosterior& posterior);

struct TimeInterval {
  NodeId lower = 0;
  NodeId upper = 0;
};

// Equal-tailed credible interval on each node's arrival time.
std::vector<TimeInterval> credible_intervals(const ArrivalPosterior& posterior, double mass);

}  // namespace treearch

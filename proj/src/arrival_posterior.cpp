#include "treearch/arrival_posterior.hpp"

#include <algorithm>
#include <numeric>

namespace treearch {

BranchCumulative::BranchCumulative(const std::vector<NodeId>& sizes) : offset_(sizes.size() + 1, 0) {
  for (std::size_t s = 0; s < sizes.size(); ++s)
    offset_[s + 1] = offset_[s] + static_cast<std::size_t>(sizes[s]);
  values_.assign(offset_.back(), kNegInf);
}

double h_exclude(const Tree& tree, const EdgeLogCounts& counts, const LogFactorials& lf,
                 std::size_t slot_ji, std::size_t slot_jk) {
  const std::size_t slot_kj = tree.reverse(slot_jk);
  const NodeId n_ji = counts.size[slot_ji];
  const NodeId n_kj = counts.size[slot_kj];
  return counts.log_h[slot_kj] + lf(n_ji) + lf(n_kj - 1 - n_ji) - counts.log_h[slot_ji] -
         lf(n_kj - 1);
}

double h_exclude(const Tree& tree, const EdgeLogCounts& counts, const LogFactorials& lf, NodeId i,
                 NodeId k, NodeId j) {
  return h_exclude(tree, counts, lf, tree.slot_of(j, i), tree.slot_of(j, k));
}

BranchCumulative branch_cumulative(const Tree& tree, const EdgeLogCounts& counts,
                                   const LogFactorials& lf) {
  BranchCumulative g(counts.size);
  const std::size_t slots = tree.slot_count();

  // g_{i->j} only reads g_{j->k} for branches strictly inside j's branch, so
  // visiting directed edges by increasing branch size resolves every
  // dependency. Counting sort keeps this linear.
  std::vector<std::size_t> by_size(slots);
  {
    std::vector<std::size_t> bucket(static_cast<std::size_t>(tree.size()) + 1, 0);
    for (std::size_t s = 0; s < slots; ++s) ++bucket[counts.size[s]];
    std::exclusive_scan(bucket.begin(), bucket.end(), bucket.begin(), std::size_t{0});
    for (std::size_t s = 0; s < slots; ++s) by_size[bucket[counts.size[s]]++] = s;
  }

  std::vector<double> increment;
  for (std::size_t s : by_size) {
    const NodeId N = counts.size[s];
    const NodeId j = tree.head(s);
    const std::size_t slot_ji = tree.reverse(s);
    auto out = g[s];
    out[0] = counts.log_h[s];
    if (N == 1) continue;

    // increment[t-1] = log(g(t+1) - g(t)), j arriving exactly at t >= 1.
    increment.assign(static_cast<std::size_t>(N - 1), kNegInf);
    for (std::size_t s2 = tree.first_slot(j); s2 < tree.end_slot(j); ++s2) {
      if (s2 == slot_ji) continue;
      const NodeId N2 = counts.size[s2];
      const double log_hx = h_exclude(tree, counts, lf, slot_ji, s2);
      const auto inner = g[s2];
      const NodeId t_max = std::min(N2, N - 1);
      for (NodeId t = 1; t <= t_max; ++t) {
        const double term = inner[t - 1] + log_hx + lf.binomial(N - t - 1, N2 - t);
        increment[t - 1] = log_add_exp(increment[t - 1], term);
      }
    }
    for (NodeId t = 1; t < N; ++t) out[t] = log_add_exp(out[t - 1], increment[t - 1]);
  }
  return g;
}

ArrivalPosterior arrival_posterior(const Tree& tree) {
  const NodeId n = tree.size();
  ArrivalPosterior out;
  if (n == 1) {
    out.P = RowMatrixXd::Ones(1, 1);
    return out;
  }
  const LogFactorials lf(static_cast<std::size_t>(n));
  const EdgeLogCounts counts = edge_log_counts(tree, lf);
  const BranchCumulative g = branch_cumulative(tree, counts, lf);

  RowMatrixXd log_p = RowMatrixXd::Constant(n, n, kNegInf);
  for (NodeId i = 0; i < n; ++i) {
    log_p(i, 0) = log_seed_count(tree, counts, lf, i);
    for (std::size_t s = tree.first_slot(i); s < tree.end_slot(i); ++s) {
      const NodeId N = counts.size[s];
      const double log_h_i_side = counts.log_h[tree.reverse(s)];
      const auto cumulative = g[s];
      for (NodeId t = 1; t <= N; ++t) {
        const double term = cumulative[t - 1] + log_h_i_side + lf.binomial(n - t - 1, N - t);
        log_p(i, t) = log_add_exp(log_p(i, t), term);
      }
    }
  }

  // Every column counts the same Z histories; normalize each one separately.
  out.P.resize(n, n);
  for (NodeId t = 0; t < n; ++t) {
    const double log_z = log_sum_exp(log_p.col(t));
    if (t == 0) out.log_Z = log_z;
    out.P.col(t) = (log_p.col(t).array() - log_z).exp();
  }
  return out;
}

Eigen::VectorXd posterior_mean_times(const ArrivalPosterior& posterior) {
  const NodeId n = posterior.size();
  return posterior.P * Eigen::VectorXd::LinSpaced(n, 0.0, static_cast<double>(n - 1));
}

std::vector<TimeInterval> credible_intervals(const ArrivalPosterior& posterior, double mass) {
  const NodeId n = posterior.size();
  const double tail = (1.0 - mass) / 2.0;
  constexpr double kSlack = 1e-12;
  std::vector<TimeInterval> out(static_cast<std::size_t>(n));
  for (NodeId i = 0; i < n; ++i) {
    double cdf = 0.0;
    bool have_lower = false;
    for (NodeId t = 0; t < n; ++t) {
      cdf += posterior.P(i, t);
      if (!have_lower && posterior.P(i, t) > 0.0 && cdf >= tail - kSlack) {
        out[i].lower = t;
        have_lower = true;
      }
      if (cdf >= 1.0 - tail - kSlack) {
        out[i].upper = t;
        break;
      }
      out[i].upper = t;
    }
  }
  return out;
}

}  // namespace treearch

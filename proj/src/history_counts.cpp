#include "treearch/history_counts.hpp"

#include <cmath>

namespace treearch {

namespace {

// Slot of parent(v) -> v for every non-root v.
std::vector<std::size_t> down_slots(const Tree& tree, const RootedView& view) {
  std::vector<std::size_t> slot(static_cast<std::size_t>(tree.size()), 0);
  for (NodeId i = 0; i < tree.size(); ++i)
    for (std::size_t s = tree.first_slot(i); s < tree.end_slot(i); ++s)
      if (view.parent[tree.head(s)] == i) slot[tree.head(s)] = s;
  return slot;
}

// Leaf-to-root pass. Fills log h_{parent(v)->v} into log_h (by slot) and
// returns, per node, sum over children k of (log h_{v->k} - log n_k!).
std::vector<double> leaf_up(const Tree& tree, const RootedView& view, const LogFactorials& lf,
                            const std::vector<std::size_t>& down, std::vector<double>& log_h) {
  std::vector<double> child_sum(static_cast<std::size_t>(tree.size()), 0.0);
  for (std::size_t k = view.order.size(); k-- > 1;) {
    const NodeId v = view.order[k];
    const NodeId size = view.subtree_size[v];
    const double lh = lf(size - 1) + child_sum[v];
    log_h[down[v]] = lh;
    child_sum[view.parent[v]] += lh - lf(size);
  }
  return child_sum;
}

}  // namespace

EdgeLogCounts edge_log_counts(const Tree& tree) {
  LogFactorials lf(static_cast<std::size_t>(tree.size()));
  return edge_log_counts(tree, lf);
}

EdgeLogCounts edge_log_counts(const Tree& tree, const LogFactorials& lf) {
  const NodeId n = tree.size();
  EdgeLogCounts counts;
  counts.log_h.assign(tree.slot_count(), 0.0);
  if (n < 2) return counts;

  const RootedView view = root_at(tree, 0);
  counts.size = branch_sizes(tree, view);
  const auto down = down_slots(tree, view);
  const auto child_sum = leaf_up(tree, view, lf, down, counts.log_h);

  // full_sum[v]: sum over all neighbours l of (log h_{v->l} - log n_{v->l}!).
  std::vector<double> full_sum(child_sum);
  for (std::size_t k = 1; k < view.order.size(); ++k) {
    const NodeId v = view.order[k];
    const NodeId p = view.parent[v];
    const NodeId size = view.subtree_size[v];
    const std::size_t up = tree.reverse(down[v]);
    const double without_v = full_sum[p] - (counts.log_h[down[v]] - lf(size));
    counts.log_h[up] = lf(n - size - 1) + without_v;
    full_sum[v] += counts.log_h[up] - lf(n - size);
  }
  return counts;
}

double log_seed_count(const Tree& tree, const EdgeLogCounts& counts, const LogFactorials& lf,
                      NodeId i) {
  double acc = lf(tree.size() - 1);
  for (std::size_t s = tree.first_slot(i); s < tree.end_slot(i); ++s)
    acc += counts.log_h[s] - lf(counts.size[s]);
  return acc;
}

SeedDistribution seed_probabilities(const Tree& tree, NodeId propagation_root) {
  const NodeId n = tree.size();
  SeedDistribution out;
  if (n == 1) {
    out.p = Eigen::VectorXd::Ones(1);
    out.log_p = Eigen::VectorXd::Zero(1);
    out.log_Z = 0.0;
    return out;
  }
  const RootedView view = root_at(tree, propagation_root);
  out.log_p.resize(n);
  out.log_p[propagation_root] = 0.0;
  for (std::size_t k = 1; k < view.order.size(); ++k) {
    const NodeId v = view.order[k];
    const double size = view.subtree_size[v];
    out.log_p[v] = out.log_p[view.parent[v]] + std::log(size) - std::log(n - size);
  }
  out.log_p.array() -= log_sum_exp(out.log_p);
  out.p = out.log_p.array().exp();

  LogFactorials lf(static_cast<std::size_t>(n));
  std::vector<double> log_h(tree.slot_count(), 0.0);
  const auto child_sum = leaf_up(tree, view, lf, down_slots(tree, view), log_h);
  const double log_h_root = lf(n - 1) + child_sum[propagation_root];
  out.log_Z = log_h_root - out.log_p[propagation_root];
  return out;
}

double total_log_histories(const Tree& tree, NodeId reference) {
  return seed_probabilities(tree, reference).log_Z;
}

}  // namespace treearch

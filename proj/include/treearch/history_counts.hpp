#pragma once

#include <Eigen/Dense>
#include <vector>

#include "treearch/log_math.hpp"
#include "treearch/tree.hpp"

namespace treearch {

// Probability that each node is the seed of a uniformly chosen consistent
// history, together with log Z, the log of the number of such histories.
struct SeedDistribution {
  Eigen::VectorXd p;
  Eigen::VectorXd log_p;
  double log_Z = 0.0;
};

// log h_{i->j} for every directed edge (indexed by tree slot): the number of
// orderings of j's branch, with edge (i, j) cut, in which j comes first.
struct EdgeLogCounts {
  std::vector<double> log_h;
  std::vector<NodeId> size;  // n_{i->j}, same indexing

  double at(const Tree& tree, NodeId i, NodeId j) const { return log_h[tree.slot_of(i, j)]; }
};

// Seeds are propagated from `propagation_root` via
//   p_j / p_i = n_{i->j} / (n - n_{i->j})
// and normalized. The result does not depend on the choice of root.
SeedDistribution seed_probabilities(const Tree& tree, NodeId propagation_root = 0);

EdgeLogCounts edge_log_counts(const Tree& tree);
EdgeLogCounts edge_log_counts(const Tree& tree, const LogFactorials& lf);

// log h_i: number of histories of the whole tree seeded at i.
double log_seed_count(const Tree& tree, const EdgeLogCounts& counts, const LogFactorials& lf,
                      NodeId i);

// log Z, evaluated as log h_r - log p_r at the reference node r.
double total_log_histories(const Tree& tree, NodeId reference = 0);

}  // namespace treearch

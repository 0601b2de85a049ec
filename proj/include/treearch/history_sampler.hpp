#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "treearch/sum_tree_sampler.hpp"
#include "treearch/history_counts.hpp"
#include "treearch/random.hpp"
#include "treearch/tree.hpp"

namespace treearch {

// The set of legal next arrivals: nodes not yet present whose parent (toward
// the root of the current orientation) is present. Each node is drawn with
// probability proportional to its subtree size, which makes every completed
// ordering equally likely.
class BoundarySampler {
 public:
  explicit BoundarySampler(std::vector<NodeId> weights);

  void insert(NodeId node);
  void remove(NodeId node);
  bool contains(NodeId node) const { return urn_.weight(static_cast<std::size_t>(node)) > 0; }
  // Throws Error(EmptyBoundary).
  NodeId draw(Rng& rng) const;

  std::int64_t active_weight() const noexcept { return urn_.total(); }
  std::size_t active_count() const noexcept { return active_; }

 private:
  std::vector<NodeId> weights_;
  SumTreeSampler<NodeId> urn_;
  std::size_t active_ = 0;
};

// Uniform sampler over the consistent histories of one tree: the seed is
// drawn from the exact seed distribution, then nodes are added from the
// boundary in proportion to their subtree sizes.
class HistorySampler {
 public:
  explicit HistorySampler(const Tree& tree);
  explicit HistorySampler(Tree&&) = delete;

  // If boundary_weights is given it receives the active boundary weight after
  // each of the n steps (the last one is always zero).
  History sample(Rng& rng, std::vector<std::int64_t>* boundary_weights = nullptr) const;

  NodeId draw_seed(Rng& rng) const;
  const SeedDistribution& seeds() const noexcept { return seeds_; }
  const Tree& tree() const noexcept { return *tree_; }

 private:
  const Tree* tree_;
  SeedDistribution seeds_;
  std::vector<double> cdf_;
  std::vector<NodeId> slot_size_;  // n_{i->j} per directed edge slot
};

// Uniform completions of a known snapshot: the subtree induced by `initial`.
class BridgeSampler {
 public:
  // Throws Error(InitialNotSubtree) for out-of-range nodes and
  // Error(InitialNotConnected) if the nodes do not induce a connected subtree.
  BridgeSampler(const Tree& tree, std::span<const NodeId> initial);
  BridgeSampler(Tree&&, std::span<const NodeId>) = delete;

  // Arrival order of the nodes outside the snapshot.
  std::vector<NodeId> sample(Rng& rng) const;

  const std::vector<NodeId>& initial() const noexcept { return initial_; }
  const Tree& tree() const noexcept { return *tree_; }

 private:
  const Tree* tree_;
  std::vector<NodeId> initial_;
  RootedView view_;
  std::vector<NodeId> first_child_;     // by breadth-first position
  std::vector<NodeId> initial_positions_;
  std::vector<char> present_;           // by breadth-first position
};

History sample_history(const Tree& tree, std::uint64_t seed);

struct Bridge {
  std::vector<NodeId> initial;
  std::vector<NodeId> order;
};

Bridge sample_bridge(const Tree& tree, std::span<const NodeId> initial, std::uint64_t seed);

}  // namespace treearch

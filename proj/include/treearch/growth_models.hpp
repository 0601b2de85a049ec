#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "treearch/tree.hpp"

namespace treearch {

// Growth mechanisms in which every arriving node attaches by a single edge.
//
// Uniform      target chosen uniformly among extant nodes.
// Kernel(g)    target chosen with probability proportional to degree^g.
// Redirection  a uniform node u is picked; with probability r the newcomer
//              attaches to u, otherwise to u's parent (to u itself when u is
//              the seed).
//
// In every model the second node attaches to the seed with probability one.
struct GrowthModel {
  enum class Kind { Uniform, Kernel, Redirection };

  Kind kind = Kind::Uniform;
  double gamma = 0.0;
  double r = 0.5;

  static GrowthModel uniform() { return {}; }
  static GrowthModel kernel(double gamma) { return {Kind::Kernel, gamma, 0.5}; }
  static GrowthModel redirection(double r = 0.5);

  // "uniform", "kernel:gamma=0.5", "redirection:r=0.5".
  static GrowthModel parse(std::string_view spec);
  std::string spec() const;

  friend bool operator==(const GrowthModel&, const GrowthModel&) = default;
};

struct GrownTree {
  Tree tree;
  History history;
};

// Grows a tree of n nodes. Node indices and labels are a random permutation of
// arrival order, and edges are stored in random order and orientation, so
// nothing about the history leaks through the tree's representation.
GrownTree generate(const GrowthModel& model, NodeId n, std::uint64_t seed);

// Running sum of deg(u)^gamma over the nodes of a growing tree.
class DegreeWeightTracker {
 public:
  DegreeWeightTracker(double gamma, NodeId capacity);

  void add_seed(NodeId seed);
  void attach(NodeId parent, NodeId child);

  double weight(NodeId degree) const noexcept;
  double total() const noexcept { return total_; }
  NodeId degree(NodeId v) const noexcept { return degree_[v]; }
  NodeId nodes() const noexcept { return nodes_; }

 private:
  double gamma_;
  double total_ = 0.0;
  NodeId nodes_ = 0;
  std::vector<NodeId> degree_;
};

// log P(G, H | model). Throws Error(Inconsistent) if the history's parent
// pointers do not describe the tree.
double log_likelihood(const Tree& tree, const History& history, const GrowthModel& model);

}  // namespace treearch

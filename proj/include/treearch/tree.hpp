#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace treearch {

using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;

using LabeledEdge = std::pair<std::string, std::string>;
using IndexEdge = std::pair<NodeId, NodeId>;

// Static undirected tree with dense node indices 0..n-1 and string labels.
//
// Adjacency is stored in CSR form. Every directed edge i->j is identified by
// its "slot": the position of j inside i's neighbor list, offset by
// first_slot(i). Per-directed-edge quantities (subtree sizes, log history
// counts, ...) are plain vectors indexed by slot.
class Tree {
 public:
  Tree() = default;

  // Labels are assigned indices in order of first appearance.
  static Tree from_edges(std::span<const LabeledEdge> edges);
  // labels may be empty, in which case node i is labeled std::to_string(i).
  static Tree from_index_edges(NodeId n, std::span<const IndexEdge> edges,
                               std::vector<std::string> labels = {});
  static Tree single(std::string label = "0");

  NodeId size() const noexcept { return static_cast<NodeId>(labels_.size()); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  std::size_t slot_count() const noexcept { return heads_.size(); }

  std::span<const NodeId> neighbors(NodeId i) const noexcept {
    return {heads_.data() + offsets_[i], heads_.data() + offsets_[i + 1]};
  }
  NodeId degree(NodeId i) const noexcept {
    return static_cast<NodeId>(offsets_[i + 1] - offsets_[i]);
  }
  std::size_t first_slot(NodeId i) const noexcept { return offsets_[i]; }
  std::size_t end_slot(NodeId i) const noexcept { return offsets_[i + 1]; }
  NodeId head(std::size_t slot) const noexcept { return heads_[slot]; }
  // Slot of the reverse directed edge.
  std::size_t reverse(std::size_t slot) const noexcept { return reverse_[slot]; }
  // Slot of i->j; j must be a neighbor of i. Linear in deg(i).
  std::size_t slot_of(NodeId i, NodeId j) const;

  bool adjacent(NodeId i, NodeId j) const;

  const std::string& label(NodeId i) const { return labels_[i]; }
  std::optional<NodeId> find(std::string_view label) const;
  // Throws Error(UnknownLabel).
  NodeId index_of(std::string_view label) const;

  // Edges in input order, as index pairs.
  const std::vector<IndexEdge>& edges() const noexcept { return edges_; }

 private:
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> heads_;
  std::vector<std::size_t> reverse_;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, NodeId> index_;
  std::vector<IndexEdge> edges_;
};

// Edge-list text: one "u v" pair per line, '#' comment lines, blank lines
// ignored. Throws Error with kind MalformedLine, SelfLoop, DuplicateEdge or
// NotATree.
Tree parse_edge_list(std::istream& in);
Tree parse_edge_list(std::string_view text);

// Writes edges in their original order, so that re-parsing reproduces the
// same label-to-index assignment.
void write_edge_list(std::ostream& out, const Tree& tree);

// Orientation of a tree away from a root.
struct RootedView {
  NodeId root = kNoNode;
  std::vector<NodeId> parent;        // kNoNode at the root
  std::vector<NodeId> subtree_size;  // subtree_size[v] == n_{parent(v) -> v}
  std::vector<NodeId> order;         // breadth-first, root first

  NodeId size() const noexcept { return static_cast<NodeId>(parent.size()); }

  // n_{from->to}: nodes on to's side of the edge (from, to), including to.
  NodeId branch_size(NodeId from, NodeId to) const noexcept {
    return parent[to] == from ? subtree_size[to] : size() - subtree_size[from];
  }
};

RootedView root_at(const Tree& tree, NodeId root);

// n_{i->j} for every directed edge, indexed by slot.
std::vector<NodeId> branch_sizes(const Tree& tree, const RootedView& view);
std::vector<NodeId> branch_sizes(const Tree& tree);

// A growth history consistent with a tree.
struct History {
  std::vector<NodeId> order;      // order[t] arrives at time t
  std::vector<NodeId> arrival;    // inverse of order
  std::vector<NodeId> parent_of;  // earlier neighbour; kNoNode for the seed

  NodeId size() const noexcept { return static_cast<NodeId>(order.size()); }
  NodeId seed() const noexcept { return order.empty() ? kNoNode : order.front(); }
};

// Validates that `order` is a permutation in which every node after the
// first has exactly one earlier neighbour. Throws Error(NotAPermutation) or
// InconsistentHistory naming the first violating position.
History is_consistent(const Tree& tree, std::span<const NodeId> order);

}  // namespace treearch

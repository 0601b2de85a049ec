#include "treearch/tree.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "treearch/error.hpp"

namespace treearch {

namespace {

constexpr std::string_view kModule = "tree_core";

class DisjointSets {
 public:
  explicit DisjointSets(NodeId n) : parent_(static_cast<std::size_t>(n)) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  NodeId find(NodeId x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool unite(NodeId a, NodeId b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[a] = b;
    return true;
  }

 private:
  std::vector<NodeId> parent_;
};

}  // namespace

Tree Tree::single(std::string label) {
  Tree tree;
  tree.offsets_ = {0, 0};
  tree.index_.emplace(label, 0);
  tree.labels_.push_back(std::move(label));
  return tree;
}

Tree Tree::from_index_edges(NodeId n, std::span<const IndexEdge> edges,
                            std::vector<std::string> labels) {
  if (n < 1) throw Error(ErrorKind::NotATree, kModule, "empty graph");
  if (labels.empty()) {
    labels.reserve(static_cast<std::size_t>(n));
    for (NodeId i = 0; i < n; ++i) labels.push_back(std::to_string(i));
  }
  if (labels.size() != static_cast<std::size_t>(n))
    throw Error(ErrorKind::InvalidArgument, kModule, "label count does not match node count");

  auto name = [&](NodeId i) { return "'" + labels[i] + "'"; };

  std::unordered_set<std::uint64_t> seen;
  seen.reserve(edges.size() * 2);
  DisjointSets components(n);
  for (const auto& [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n)
      throw Error(ErrorKind::InvalidArgument, kModule, "edge endpoint out of range");
    if (u == v) throw Error(ErrorKind::SelfLoop, kModule, "at node " + name(u));
    const auto lo = static_cast<std::uint64_t>(std::min(u, v));
    const auto hi = static_cast<std::uint64_t>(std::max(u, v));
    if (!seen.insert(lo * static_cast<std::uint64_t>(n) + hi).second)
      throw Error(ErrorKind::DuplicateEdge, kModule, name(u) + " -- " + name(v));
    if (!components.unite(u, v))
      throw Error(ErrorKind::NotATree, kModule, "cycle closed by edge " + name(u) + " -- " + name(v));
  }
  if (edges.size() != static_cast<std::size_t>(n - 1))
    throw Error(ErrorKind::NotATree, kModule,
                "disconnected: " + std::to_string(n) + " nodes but " +
                    std::to_string(edges.size()) + " edges");

  Tree tree;
  tree.labels_ = std::move(labels);
  tree.index_.reserve(tree.labels_.size());
  for (NodeId i = 0; i < n; ++i) {
    if (!tree.index_.emplace(tree.labels_[i], i).second)
      throw Error(ErrorKind::InvalidArgument, kModule, "duplicate label " + name(i));
  }
  tree.edges_.assign(edges.begin(), edges.end());

  tree.offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (const auto& [u, v] : edges) {
    ++tree.offsets_[u + 1];
    ++tree.offsets_[v + 1];
  }
  std::partial_sum(tree.offsets_.begin(), tree.offsets_.end(), tree.offsets_.begin());
  tree.heads_.resize(2 * edges.size());
  tree.reverse_.resize(2 * edges.size());
  std::vector<std::size_t> fill(tree.offsets_.begin(), tree.offsets_.end() - 1);
  for (const auto& [u, v] : edges) {
    const std::size_t su = fill[u]++;
    const std::size_t sv = fill[v]++;
    tree.heads_[su] = v;
    tree.heads_[sv] = u;
    tree.reverse_[su] = sv;
    tree.reverse_[sv] = su;
  }
  return tree;
}

Tree Tree::from_edges(std::span<const LabeledEdge> edges) {
  std::vector<std::string> labels;
  std::unordered_map<std::string, NodeId> index;
  std::vector<IndexEdge> indexed;
  indexed.reserve(edges.size());
  auto intern = [&](const std::string& label) {
    auto [it, inserted] = index.emplace(label, static_cast<NodeId>(labels.size()));
    if (inserted) labels.push_back(label);
    return it->second;
  };
  for (const auto& [a, b] : edges) {
    const NodeId u = intern(a);
    const NodeId v = intern(b);
    indexed.emplace_back(u, v);
  }
  const auto n = static_cast<NodeId>(labels.size());
  return from_index_edges(n, indexed, std::move(labels));
}

std::size_t Tree::slot_of(NodeId i, NodeId j) const {
  for (std::size_t s = offsets_[i]; s < offsets_[i + 1]; ++s)
    if (heads_[s] == j) return s;
  throw Error(ErrorKind::InvalidArgument, kModule,
              "'" + labels_[i] + "' and '" + labels_[j] + "' are not adjacent");
}

bool Tree::adjacent(NodeId i, NodeId j) const {
  const auto nb = neighbors(i);
  return std::find(nb.begin(), nb.end(), j) != nb.end();
}

std::optional<NodeId> Tree::find(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

NodeId Tree::index_of(std::string_view label) const {
  if (auto idx = find(label)) return *idx;
  throw Error(ErrorKind::UnknownLabel, kModule, "'" + std::string(label) + "'");
}

Tree parse_edge_list(std::istream& in) {
  std::vector<LabeledEdge> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    std::string a, b, extra;
    if (!(fields >> a >> b) || (fields >> extra))
      throw Error(ErrorKind::MalformedLine, kModule,
                  "line " + std::to_string(line_no) + ": expected two labels");
    edges.emplace_back(std::move(a), std::move(b));
  }
  if (edges.empty()) throw Error(ErrorKind::NotATree, kModule, "no edges");
  return Tree::from_edges(edges);
}

Tree parse_edge_list(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_edge_list(in);
}

void write_edge_list(std::ostream& out, const Tree& tree) {
  for (const auto& [u, v] : tree.edges()) out << tree.label(u) << ' ' << tree.label(v) << '\n';
}

RootedView root_at(const Tree& tree, NodeId root) {
  const NodeId n = tree.size();
  if (root < 0 || root >= n)
    throw Error(ErrorKind::InvalidArgument, kModule, "root index out of range");
  RootedView view;
  view.root = root;
  view.parent.assign(static_cast<std::size_t>(n), kNoNode);
  view.subtree_size.assign(static_cast<std::size_t>(n), 1);
  view.order.reserve(static_cast<std::size_t>(n));
  view.order.push_back(root);
  // The order vector doubles as the BFS queue.
  for (std::size_t head = 0; head < view.order.size(); ++head) {
    const NodeId v = view.order[head];
    for (NodeId w : tree.neighbors(v)) {
      if (w == view.parent[v]) continue;
      view.parent[w] = v;
      view.order.push_back(w);
    }
  }
  for (std::size_t k = view.order.size(); k-- > 1;) {
    const NodeId v = view.order[k];
    view.subtree_size[view.parent[v]] += view.subtree_size[v];
  }
  return view;
}

std::vector<NodeId> branch_sizes(const Tree& tree, const RootedView& view) {
  std::vector<NodeId> sizes(tree.slot_count());
  for (NodeId i = 0; i < tree.size(); ++i)
    for (std::size_t s = tree.first_slot(i); s < tree.end_slot(i); ++s)
      sizes[s] = view.branch_size(i, tree.head(s));
  return sizes;
}

std::vector<NodeId> branch_sizes(const Tree& tree) { return branch_sizes(tree, root_at(tree, 0)); }

History is_consistent(const Tree& tree, std::span<const NodeId> order) {
  const NodeId n = tree.size();
  if (order.size() != static_cast<std::size_t>(n))
    throw Error(ErrorKind::NotAPermutation, kModule,
                "length " + std::to_string(order.size()) + " but tree has " + std::to_string(n) +
                    " nodes");
  History h;
  h.order.assign(order.begin(), order.end());
  h.arrival.assign(static_cast<std::size_t>(n), kNoNode);
  h.parent_of.assign(static_cast<std::size_t>(n), kNoNode);
  for (NodeId t = 0; t < n; ++t) {
    const NodeId v = order[t];
    if (v < 0 || v >= n) throw Error(ErrorKind::NotAPermutation, kModule, "index out of range");
    if (h.arrival[v] != kNoNode)
      throw Error(ErrorKind::NotAPermutation, kModule, "'" + tree.label(v) + "' repeated");
    h.arrival[v] = t;
  }
  for (NodeId t = 1; t < n; ++t) {
    const NodeId v = order[t];
    NodeId earlier = 0;
    for (NodeId w : tree.neighbors(v)) {
      if (h.arrival[w] < t) {
        ++earlier;
        h.parent_of[v] = w;
      }
    }
    if (earlier != 1)
      throw InconsistentHistory(static_cast<std::size_t>(t),
                                "'" + tree.label(v) + "' has " + std::to_string(earlier) +
                                    " earlier neighbours");
  }
  return h;
}

}  // namespace treearch

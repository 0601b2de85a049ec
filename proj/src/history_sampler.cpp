#include "treearch/history_sampler.hpp"

#include <algorithm>
#include <numeric>

#include "treearch/error.hpp"

namespace treearch {

namespace {

constexpr std::string_view kModule = "history_sampler";

// first_child[p]..first_child[p + 1] are the breadth-first positions of the
// children of the node at position p.
std::vector<NodeId> child_ranges(const Tree& tree, const RootedView& view) {
  const NodeId n = view.size();
  std::vector<NodeId> first(static_cast<std::size_t>(n) + 1);
  NodeId next = 1;
  for (NodeId p = 0; p < n; ++p) {
    first[p] = next;
    next += tree.degree(view.order[p]) - (p > 0);
  }
  first[n] = next;
  return first;
}

}  // namespace

BoundarySampler::BoundarySampler(std::vector<NodeId> weights)
    : weights_(std::move(weights)), urn_(weights_.size()) {}

void BoundarySampler::insert(NodeId node) {
  if (contains(node)) return;
  urn_.set(static_cast<std::size_t>(node), weights_[node]);
  ++active_;
}

void BoundarySampler::remove(NodeId node) {
  if (!contains(node)) return;
  urn_.set(static_cast<std::size_t>(node), 0);
  --active_;
}

NodeId BoundarySampler::draw(Rng& rng) const {
  if (urn_.empty()) throw Error(ErrorKind::EmptyBoundary, kModule, "draw from empty boundary");
  return static_cast<NodeId>(urn_.draw(rng));
}

HistorySampler::HistorySampler(const Tree& tree)
    : tree_(&tree),
      seeds_(seed_probabilities(tree)),
      cdf_(seeds_.p.begin(), seeds_.p.end()),
      slot_size_(branch_sizes(tree)) {
  std::partial_sum(cdf_.begin(), cdf_.end(), cdf_.begin());
}

NodeId HistorySampler::draw_seed(Rng& rng) const {
  const double u = rng.uniform() * cdf_.back();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  return static_cast<NodeId>(it - cdf_.begin());
}

History HistorySampler::sample(Rng& rng, std::vector<std::int64_t>* boundary_weights) const {
  const Tree& tree = *tree_;
  const NodeId n = tree.size();
  const NodeId seed = draw_seed(rng);

  History h;
  h.parent_of.assign(static_cast<std::size_t>(n), kNoNode);
  if (boundary_weights) boundary_weights->clear();

  // Breadth-first layout from the seed: position p holds node at[p], whose
  // children sit at positions first_child[p]..first_child[p + 1] with subtree
  // sizes weight[...]. The random accesses here are independent of each other,
  // unlike those of the sampling loop below, which therefore touches only
  // position-indexed arrays.
  std::vector<NodeId> at(static_cast<std::size_t>(n)), first_child(static_cast<std::size_t>(n) + 1),
      weight(static_cast<std::size_t>(n));
  at[0] = seed;
  weight[0] = n;
  NodeId tail = 1;
  for (NodeId p = 0; p < n; ++p) {
    const NodeId v = at[p];
    const NodeId up = h.parent_of[v];
    first_child[p] = tail;
    for (std::size_t slot = tree.first_slot(v); slot < tree.end_slot(v); ++slot) {
      const NodeId w = tree.head(slot);
      if (w == up) continue;
      h.parent_of[w] = v;
      at[tail] = w;
      weight[tail] = slot_size_[slot];
      ++tail;
    }
  }
  first_child[n] = tail;

  SumTreeSampler<NodeId> urn(static_cast<std::size_t>(n));
  std::vector<NodeId> placed;
  placed.reserve(static_cast<std::size_t>(n));
  auto place = [&](NodeId pos) {
    placed.push_back(pos);
    for (NodeId c = first_child[pos]; c < first_child[pos + 1]; ++c) urn.set(static_cast<std::size_t>(c), weight[c]);
    if (boundary_weights) boundary_weights->push_back(urn.total());
  };
  place(0);
  while (static_cast<NodeId>(placed.size()) < n) {
    const auto pos = static_cast<NodeId>(urn.draw(rng));
    urn.set(static_cast<std::size_t>(pos), 0);
    place(pos);
  }

  h.order.resize(static_cast<std::size_t>(n));
  h.arrival.resize(static_cast<std::size_t>(n));
  for (NodeId t = 0; t < n; ++t) h.order[t] = at[placed[t]];
  for (NodeId t = 0; t < n; ++t) h.arrival[h.order[t]] = t;
  return h;
}

BridgeSampler::BridgeSampler(const Tree& tree, std::span<const NodeId> initial) : tree_(&tree) {
  const NodeId n = tree.size();
  if (initial.empty()) throw Error(ErrorKind::InvalidArgument, kModule, "initial snapshot is empty");
  present_.assign(static_cast<std::size_t>(n), 0);
  for (NodeId v : initial) {
    if (v < 0 || v >= n)
      throw Error(ErrorKind::InitialNotSubtree, kModule, "node index " + std::to_string(v));
    if (!present_[v]) {
      present_[v] = 1;
      initial_.push_back(v);
    }
  }

  // Connectivity of the induced subgraph, by search restricted to it.
  std::vector<char> reached(static_cast<std::size_t>(n), 0);
  std::vector<NodeId> stack{initial_.front()};
  reached[initial_.front()] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const NodeId v = stack.back();
    stack.pop_back();
    for (NodeId w : tree.neighbors(v)) {
      if (present_[w] && !reached[w]) {
        reached[w] = 1;
        ++count;
        stack.push_back(w);
      }
    }
  }
  if (count != initial_.size())
    throw Error(ErrorKind::InitialNotConnected, kModule,
                std::to_string(initial_.size() - count) + " snapshot node(s) unreachable from '" +
                    tree.label(initial_.front()) + "'");

  view_ = root_at(tree, initial_.front());
  first_child_ = child_ranges(tree, view_);
  std::vector<char> present_node(std::move(present_));
  present_.assign(static_cast<std::size_t>(n), 0);
  for (NodeId p = 0; p < n; ++p)
    if (present_node[view_.order[p]]) {
      present_[p] = 1;
      initial_positions_.push_back(p);
    }
}

std::vector<NodeId> BridgeSampler::sample(Rng& rng) const {
  const NodeId n = tree_->size();
  SumTreeSampler<NodeId> urn(static_cast<std::size_t>(n));
  auto open_children = [&](NodeId pos) {
    for (NodeId c = first_child_[pos]; c < first_child_[pos + 1]; ++c)
      if (!present_[c]) urn.set(static_cast<std::size_t>(c), view_.subtree_size[view_.order[c]]);
  };
  for (NodeId p : initial_positions_) open_children(p);

  std::vector<NodeId> order;
  order.reserve(static_cast<std::size_t>(n) - initial_.size());
  while (!urn.empty()) {
    const auto pos = static_cast<NodeId>(urn.draw(rng));
    urn.set(static_cast<std::size_t>(pos), 0);
    order.push_back(view_.order[pos]);
    open_children(pos);
  }
  return order;
}

History sample_history(const Tree& tree, std::uint64_t seed) {
  Rng rng(seed);
  return HistorySampler(tree).sample(rng);
}

Bridge sample_bridge(const Tree& tree, std::span<const NodeId> initial, std::uint64_t seed) {
  Rng rng(seed);
  BridgeSampler sampler(tree, initial);
  return {sampler.initial(), sampler.sample(rng)};
}

}  // namespace treearch

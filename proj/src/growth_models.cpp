#include "treearch/growth_models.hpp"

#include <charconv>
#include <cmath>
#include <numeric>

#include "treearch/error.hpp"
#include "treearch/sum_tree_sampler.hpp"
#include "treearch/random.hpp"

namespace treearch {

namespace {

constexpr std::string_view kModule = "growth_models";

std::string format_number(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_parameter(std::string_view spec, std::string_view params, std::string_view name) {
  const std::string prefix = std::string(name) + "=";
  if (params.substr(0, prefix.size()) != prefix)
    throw Error(ErrorKind::InvalidArgument, kModule,
                "expected '" + prefix + "<value>' in model spec '" + std::string(spec) + "'");
  const std::string_view value = params.substr(prefix.size());
  double out = 0.0;
  auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size())
    throw Error(ErrorKind::InvalidArgument, kModule,
                "bad number in model spec '" + std::string(spec) + "'");
  return out;
}

}  // namespace

GrowthModel GrowthModel::redirection(double r) {
  if (!(r > 0.0 && r <= 1.0))
    throw Error(ErrorKind::InvalidArgument, kModule, "redirection r must lie in (0, 1]");
  return {Kind::Redirection, 0.0, r};
}

GrowthModel GrowthModel::parse(std::string_view spec) {
  const auto colon = spec.find(':');
  const std::string_view name = spec.substr(0, colon);
  const std::string_view params = colon == std::string_view::npos ? "" : spec.substr(colon + 1);
  if (name == "uniform" && params.empty()) return uniform();
  if (name == "kernel") return kernel(parse_parameter(spec, params, "gamma"));
  if (name == "redirection")
    return params.empty() ? redirection() : redirection(parse_parameter(spec, params, "r"));
  throw Error(ErrorKind::InvalidArgument, kModule, "unknown model spec '" + std::string(spec) + "'");
}

std::string GrowthModel::spec() const {
  switch (kind) {
    case Kind::Uniform: return "uniform";
    case Kind::Kernel: return "kernel:gamma=" + format_number(gamma);
    case Kind::Redirection: return "redirection:r=" + format_number(r);
  }
  return {};
}

DegreeWeightTracker::DegreeWeightTracker(double gamma, NodeId capacity)
    : gamma_(gamma), degree_(static_cast<std::size_t>(capacity), 0) {}

double DegreeWeightTracker::weight(NodeId degree) const noexcept {
  // Degree zero only occurs for a lone seed.
  if (degree == 0) return gamma_ == 0.0 ? 1.0 : 0.0;
  return std::exp(gamma_ * std::log(static_cast<double>(degree)));
}

void DegreeWeightTracker::add_seed(NodeId seed) {
  degree_[seed] = 0;
  total_ = weight(0);
  nodes_ = 1;
}

void DegreeWeightTracker::attach(NodeId parent, NodeId child) {
  const NodeId d = degree_[parent];
  total_ += weight(d + 1) - weight(d);
  degree_[parent] = d + 1;
  degree_[child] = 1;
  total_ += weight(1);
  ++nodes_;
}

GrownTree generate(const GrowthModel& model, NodeId n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, kModule, "n must be at least 1");
  Rng rng(seed);

  // Grow in arrival-index space: node t arrives at time t.
  std::vector<NodeId> parent(static_cast<std::size_t>(n), kNoNode);
  switch (model.kind) {
    case GrowthModel::Kind::Uniform:
      for (NodeId t = 1; t < n; ++t) parent[t] = static_cast<NodeId>(rng.below(t));
      break;
    case GrowthModel::Kind::Redirection:
      for (NodeId t = 1; t < n; ++t) {
        const auto u = static_cast<NodeId>(rng.below(t));
        const bool direct = rng.bernoulli(model.r);
        parent[t] = (direct || u == 0) ? u : parent[u];
      }
      break;
    case GrowthModel::Kind::Kernel: {
      DegreeWeightTracker degrees(model.gamma, n);
      SumTreeSampler<double> urn(static_cast<std::size_t>(n));
      degrees.add_seed(0);
      for (NodeId t = 1; t < n; ++t) {
        const NodeId target = t == 1 ? 0 : static_cast<NodeId>(urn.draw(rng));
        parent[t] = target;
        degrees.attach(target, t);
        urn.set(static_cast<std::size_t>(target), degrees.weight(degrees.degree(target)));
        urn.set(static_cast<std::size_t>(t), degrees.weight(1));
      }
      break;
    }
  }

  std::vector<NodeId> relabel(static_cast<std::size_t>(n));
  std::iota(relabel.begin(), relabel.end(), 0);
  for (NodeId i = n - 1; i > 0; --i)
    std::swap(relabel[i], relabel[static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(i) + 1))]);

  std::vector<IndexEdge> edges;
  edges.reserve(static_cast<std::size_t>(n - 1));
  for (NodeId t = 1; t < n; ++t) {
    NodeId a = relabel[parent[t]];
    NodeId b = relabel[t];
    if (rng.bernoulli(0.5)) std::swap(a, b);
    edges.emplace_back(a, b);
  }
  for (std::size_t i = edges.size(); i > 1; --i) std::swap(edges[i - 1], edges[rng.below(i)]);

  GrownTree out;
  out.tree = n == 1 ? Tree::single("0") : Tree::from_index_edges(n, edges);
  std::vector<NodeId> order(static_cast<std::size_t>(n));
  for (NodeId t = 0; t < n; ++t) order[t] = relabel[t];
  out.history = is_consistent(out.tree, order);
  return out;
}

double log_likelihood(const Tree& tree, const History& history, const GrowthModel& model) {
  const NodeId n = tree.size();
  if (history.size() != n)
    throw Error(ErrorKind::Inconsistent, kModule, "history length does not match tree");
  for (NodeId t = 1; t < n; ++t) {
    const NodeId v = history.order[t];
    const NodeId p = history.parent_of[v];
    if (p == kNoNode || history.arrival[p] >= t || !tree.adjacent(p, v))
      throw InconsistentHistory(static_cast<std::size_t>(t), "in log_likelihood");
  }

  double acc = 0.0;
  switch (model.kind) {
    case GrowthModel::Kind::Uniform:
      for (NodeId t = 2; t < n; ++t) acc += -std::log(static_cast<double>(t));
      break;
    case GrowthModel::Kind::Kernel: {
      DegreeWeightTracker degrees(model.gamma, n);
      degrees.add_seed(history.order[0]);
      if (n > 1) degrees.attach(history.order[0], history.order[1]);
      for (NodeId t = 2; t < n; ++t) {
        const NodeId v = history.order[t];
        const NodeId p = history.parent_of[v];
        acc += model.gamma * std::log(static_cast<double>(degrees.degree(p))) -
               std::log(degrees.total());
        degrees.attach(p, v);
      }
      break;
    }
    case GrowthModel::Kind::Redirection: {
      // children[u]: nodes already attached to u.
      std::vector<NodeId> children(static_cast<std::size_t>(n), 0);
      const NodeId seed = history.order[0];
      if (n > 1) children[seed] = 1;
      for (NodeId t = 2; t < n; ++t) {
        const NodeId v = history.order[t];
        const NodeId p = history.parent_of[v];
        double ways = model.r + (1.0 - model.r) * children[p];
        if (p == seed) ways += 1.0 - model.r;
        acc += std::log(ways) - std::log(static_cast<double>(t));
        ++children[p];
      }
      break;
    }
  }
  return acc;
}

}  // namespace treearch

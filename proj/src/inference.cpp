#include "treearch/inference.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

#include "treearch/error.hpp"
#include "treearch/history_counts.hpp"
#include "treearch/log_math.hpp"
#include "treearch/parallel.hpp"

namespace treearch {

namespace {

constexpr std::string_view kModule = "inference";
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double parse_number(std::string_view text, std::string_view context) {
  double out = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw Error(ErrorKind::InvalidArgument, kModule, "bad number in '" + std::string(context) + "'");
  return out;
}

// Interval on a discrete grid from cumulative masses; endpoints are the first
// points whose cdf reaches each tail.
Interval equal_tailed(const Eigen::VectorXd& grid, const Eigen::VectorXd& mass, double level) {
  const double tail = (1.0 - level) / 2.0;
  constexpr double kSlack = 1e-12;
  Interval out{grid[0], grid[grid.size() - 1]};
  double cdf = 0.0;
  bool have_lower = false;
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    cdf += mass[k];
    if (!have_lower && mass[k] > 0.0 && cdf >= tail - kSlack) {
      out.lower = grid[k];
      have_lower = true;
    }
    if (cdf >= 1.0 - tail - kSlack) {
      out.upper = grid[k];
      break;
    }
  }
  return out;
}

// log of mean(exp(values)) and the delta-method standard error of that log.
struct LogMean {
  double log_mean;
  double std_error;
};

LogMean log_mean_exp(const Eigen::VectorXd& values) {
  const auto S = static_cast<double>(values.size());
  const double hi = values.maxCoeff();
  if (hi == kNegInf) return {kNegInf, kNaN};
  const Eigen::ArrayXd w = (values.array() - hi).exp();
  const double mean = w.mean();
  double se = kNaN;
  if (values.size() > 1) {
    const double var = (w - mean).square().sum() / (S - 1.0);
    se = std::sqrt(var / S) / mean;
  }
  return {hi + std::log(mean), se};
}

KernelPosterior summarize(const Eigen::VectorXd& grid, Eigen::VectorXd log_evidence,
                          Eigen::VectorXd std_error, std::size_t samples) {
  KernelPosterior post;
  post.grid = grid;
  post.samples = samples;
  const double norm = log_sum_exp(log_evidence);
  post.mass = (log_evidence.array() - norm).exp();
  post.log_evidence = std::move(log_evidence);
  post.std_error = std::move(std_error);
  post.mean = post.mass.dot(grid);
  Eigen::Index best = 0;
  post.mass.maxCoeff(&best);
  post.map = grid[best];
  post.ci50 = post.credible_interval(0.5);
  post.ci95 = post.credible_interval(0.95);
  return post;
}

KernelPosterior kernel_posterior_impl(const Tree& tree, std::span<const History> histories,
                                      const Eigen::VectorXd& grid, double log_offset) {
  if (histories.empty()) throw Error(ErrorKind::InvalidArgument, kModule, "no histories");
  if (grid.size() == 0) throw Error(ErrorKind::InvalidArgument, kModule, "empty gamma grid");
  const auto S = static_cast<Eigen::Index>(histories.size());
  const Eigen::Index G = grid.size();
  Eigen::MatrixXd ll(S, G);
  parallel_for(static_cast<std::size_t>(S), [&](std::size_t s) {
    for (Eigen::Index k = 0; k < G; ++k)
      ll(static_cast<Eigen::Index>(s), k) =
          log_likelihood(tree, histories[s], GrowthModel::kernel(grid[k]));
  });
  Eigen::VectorXd log_ev(G), se(G);
  for (Eigen::Index k = 0; k < G; ++k) {
    const LogMean m = log_mean_exp(ll.col(k));
    log_ev[k] = m.log_mean + log_offset;
    se[k] = m.std_error;
  }
  return summarize(grid, std::move(log_ev), std::move(se), histories.size());
}

// Trapezoid weights for a uniform prior on [grid.front(), grid.back()].
Eigen::VectorXd trapezoid_prior_weights(const Eigen::VectorXd& grid) {
  const Eigen::Index G = grid.size();
  if (G == 1) return Eigen::VectorXd::Ones(1);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(G);
  for (Eigen::Index k = 0; k + 1 < G; ++k) {
    const double half = (grid[k + 1] - grid[k]) / 2.0;
    w[k] += half;
    w[k + 1] += half;
  }
  return w / (grid[G - 1] - grid[0]);
}

std::string describe_grid(const Eigen::VectorXd& grid) {
  auto fmt = [](double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
  };
  if (grid.size() == 1) return fmt(grid[0]);
  return fmt(grid[0]) + ":" + fmt(grid[grid.size() - 1]) + ":" + fmt(grid[1] - grid[0]);
}

class StatTracker {
 public:
  explicit StatTracker(NodeId n) : degree_(static_cast<std::size_t>(n), 0) {}

  void add(NodeId v, NodeId parent) {
    ++nodes_;
    if (parent == kNoNode) return;
    const double d = degree_[parent];
    degree_[parent] += 1;
    degree_[v] = 1;
    sum_ += 2.0;
    sum_sq_ += 2.0 * d + 1.0 + 1.0;
    max_ = std::max({max_, degree_[parent], NodeId{1}});
  }

  NodeId nodes() const noexcept { return nodes_; }

  double value(Statistic stat) const {
    switch (stat) {
      case Statistic::NodeCount: return nodes_;
      case Statistic::MeanDegree: return sum_ / nodes_;
      case Statistic::ExcessDegree: return sum_ > 0.0 ? (sum_sq_ - sum_) / sum_ : 0.0;
      case Statistic::MaxDegree: return max_;
    }
    return 0.0;
  }

 private:
  std::vector<NodeId> degree_;
  NodeId nodes_ = 0;
  NodeId max_ = 0;
  double sum_ = 0.0;
  double sum_sq_ = 0.0;
};

// Replays `order` into `tracker`, locating each node's present neighbour.
void replay(const Tree& tree, std::span<const NodeId> order, std::vector<char>& present,
            StatTracker& tracker, Statistic stat, std::vector<double>* values) {
  for (NodeId v : order) {
    NodeId parent = kNoNode;
    for (NodeId w : tree.neighbors(v))
      if (present[w]) parent = w;
    if (parent == kNoNode && tracker.nodes() > 0)
      throw Error(ErrorKind::Inconsistent, kModule,
                  "'" + tree.label(v) + "' is not adjacent to any earlier node");
    present[v] = 1;
    tracker.add(v, parent);
    if (values) values->push_back(tracker.value(stat));
  }
}

double quantile(std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Eigen::VectorXd average_ranks(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  Eigen::VectorXd rank(n);
  for (Eigen::Index i = 0; i < n;) {
    Eigen::Index j = i;
    while (j + 1 < n && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0;
    for (Eigen::Index k = i; k <= j; ++k) rank[idx[k]] = avg;
    i = j + 1;
  }
  return rank;
}

}  // namespace

Eigen::VectorXd make_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo) || !std::isfinite(lo) || !std::isfinite(hi))
    throw Error(ErrorKind::InvalidArgument, kModule, "grid needs lo <= hi and step > 0");
  const auto count = static_cast<Eigen::Index>(std::floor((hi - lo) / step + 1e-9)) + 1;
  Eigen::VectorXd grid(count);
  for (Eigen::Index k = 0; k < count; ++k) grid[k] = lo + static_cast<double>(k) * step;
  return grid;
}

Eigen::VectorXd parse_grid(std::string_view spec) {
  const auto a = spec.find(':');
  const auto b = a == std::string_view::npos ? a : spec.find(':', a + 1);
  if (a == std::string_view::npos) {
    const double x = parse_number(spec, spec);
    return Eigen::VectorXd::Constant(1, x);
  }
  if (b == std::string_view::npos)
    throw Error(ErrorKind::InvalidArgument, kModule, "grid spec must be lo:hi:step");
  return make_grid(parse_number(spec.substr(0, a), spec), parse_number(spec.substr(a + 1, b - a - 1), spec),
                   parse_number(spec.substr(b + 1), spec));
}

Eigen::VectorXd default_gamma_grid() { return make_grid(-2.0, 3.0, 0.05); }

std::vector<History> draw_histories(const Tree& tree, std::size_t samples, std::uint64_t seed) {
  const HistorySampler sampler(tree);
  std::vector<History> out(samples);
  parallel_for(samples, [&](std::size_t s) {
    Rng rng = Rng::stream(seed, s);
    out[s] = sampler.sample(rng);
  });
  return out;
}

Interval KernelPosterior::credible_interval(double level) const {
  return equal_tailed(grid, mass, level);
}

KernelPosterior kernel_posterior(const Tree& tree, std::size_t samples, const Eigen::VectorXd& grid,
                                 std::uint64_t seed) {
  if (samples < 1) throw Error(ErrorKind::InvalidArgument, kModule, "need at least one sample");
  const auto histories = draw_histories(tree, samples, seed);
  return kernel_posterior_impl(tree, histories, grid, total_log_histories(tree));
}

KernelPosterior kernel_posterior(const Tree& tree, std::span<const History> histories,
                                 const Eigen::VectorXd& grid) {
  return kernel_posterior_impl(tree, histories, grid, 0.0);
}

Hypothesis Hypothesis::parse(std::string_view spec, const Eigen::VectorXd& grid) {
  Hypothesis h;
  if (spec == "kernel") {
    h.model = GrowthModel::kernel(kNaN);
    h.integrate_gamma = true;
    h.gamma_grid = grid;
    if (grid.size() == 0) throw Error(ErrorKind::InvalidArgument, kModule, "empty gamma grid");
  } else {
    h.model = GrowthModel::parse(spec);
  }
  return h;
}

std::string Hypothesis::spec() const {
  if (integrate_gamma) return "kernel:gamma~uniform[" + describe_grid(gamma_grid) + "]";
  return model.spec();
}

double Hypothesis::log_likelihood(const Tree& tree, const History& history) const {
  if (!integrate_gamma) return treearch::log_likelihood(tree, history, model);
  const Eigen::VectorXd w = trapezoid_prior_weights(gamma_grid);
  Eigen::VectorXd terms(gamma_grid.size());
  for (Eigen::Index k = 0; k < gamma_grid.size(); ++k)
    terms[k] = std::log(w[k]) +
               treearch::log_likelihood(tree, history, GrowthModel::kernel(gamma_grid[k]));
  return log_sum_exp(terms);
}

BayesFactor log_bayes_factor(const Tree& tree, const Hypothesis& a, const Hypothesis& b,
                             std::size_t samples, std::uint64_t seed) {
  if (samples < 1) throw Error(ErrorKind::InvalidArgument, kModule, "need at least one sample");
  const auto histories = draw_histories(tree, samples, seed);
  BayesFactor bf = log_bayes_factor(tree, a, b, histories);
  const double log_z = total_log_histories(tree);
  bf.log_evidence_a += log_z;
  bf.log_evidence_b += log_z;
  return bf;
}

BayesFactor log_bayes_factor(const Tree& tree, const Hypothesis& a, const Hypothesis& b,
                             std::span<const History> histories) {
  const auto S = static_cast<Eigen::Index>(histories.size());
  if (S == 0) throw Error(ErrorKind::InvalidArgument, kModule, "no histories");
  Eigen::VectorXd la(S), lb(S);
  parallel_for(histories.size(), [&](std::size_t s) {
    la[static_cast<Eigen::Index>(s)] = a.log_likelihood(tree, histories[s]);
    lb[static_cast<Eigen::Index>(s)] = b.log_likelihood(tree, histories[s]);
  });

  BayesFactor bf;
  bf.samples = histories.size();
  bf.log_evidence_a = log_mean_exp(la).log_mean;
  bf.log_evidence_b = log_mean_exp(lb).log_mean;
  bf.log_K = log_sum_exp(la) - log_sum_exp(lb);
  bf.std_error = kNaN;
  if (S > 1) {
    const Eigen::ArrayXd wa = (la.array() - la.maxCoeff()).exp();
    const Eigen::ArrayXd wb = (lb.array() - lb.maxCoeff()).exp();
    const double ma = wa.mean(), mb = wb.mean();
    const double denom = static_cast<double>(S - 1);
    const double var_a = (wa - ma).square().sum() / denom;
    const double var_b = (wb - mb).square().sum() / denom;
    const double cov = ((wa - ma) * (wb - mb)).sum() / denom;
    const double var = var_a / (ma * ma) + var_b / (mb * mb) - 2.0 * cov / (ma * mb);
    bf.std_error = std::sqrt(std::max(0.0, var) / static_cast<double>(S));
  }
  return bf;
}

ReweightedTimes reweighted_arrival_times(const Tree& tree, const GrowthModel& model,
                                         std::size_t samples, std::uint64_t seed) {
  if (samples < 1) throw Error(ErrorKind::InvalidArgument, kModule, "need at least one sample");
  return reweighted_arrival_times(tree, model, draw_histories(tree, samples, seed));
}

ReweightedTimes reweighted_arrival_times(const Tree& tree, const GrowthModel& model,
                                         std::span<const History> histories) {
  const auto S = static_cast<Eigen::Index>(histories.size());
  const NodeId n = tree.size();
  Eigen::VectorXd ll(S);
  parallel_for(histories.size(), [&](std::size_t s) {
    ll[static_cast<Eigen::Index>(s)] = log_likelihood(tree, histories[s], model);
  });
  const Eigen::VectorXd w = (ll.array() - ll.maxCoeff()).exp();
  const double total = w.sum();

  ReweightedTimes out;
  out.samples = histories.size();
  out.effective_sample_size = total * total / w.squaredNorm();
  if (!(out.effective_sample_size >= 2.0))
    throw Error(ErrorKind::DegenerateWeights, kModule,
                "effective sample size " + std::to_string(out.effective_sample_size) + " < 2");

  out.mean = Eigen::VectorXd::Zero(n);
  for (Eigen::Index s = 0; s < S; ++s)
    out.mean += w[s] * Eigen::Map<const Eigen::VectorXi>(histories[s].arrival.data(), n).cast<double>();
  out.mean /= total;

  Eigen::VectorXd dev2 = Eigen::VectorXd::Zero(n);
  for (Eigen::Index s = 0; s < S; ++s) {
    const Eigen::VectorXd tau =
        Eigen::Map<const Eigen::VectorXi>(histories[s].arrival.data(), n).cast<double>();
    dev2 += (w[s] * w[s]) * (tau - out.mean).array().square().matrix();
  }
  out.std_error = dev2.cwiseSqrt() / total;
  return out;
}

Statistic parse_statistic(std::string_view name) {
  if (name == "node-count") return Statistic::NodeCount;
  if (name == "excess-degree") return Statistic::ExcessDegree;
  if (name == "mean-degree") return Statistic::MeanDegree;
  if (name == "max-degree") return Statistic::MaxDegree;
  throw Error(ErrorKind::InvalidArgument, kModule, "unknown statistic '" + std::string(name) + "'");
}

std::string_view to_string(Statistic stat) {
  switch (stat) {
    case Statistic::NodeCount: return "node-count";
    case Statistic::ExcessDegree: return "excess-degree";
    case Statistic::MeanDegree: return "mean-degree";
    case Statistic::MaxDegree: return "max-degree";
  }
  return "";
}

std::vector<double> statistic_along(const Tree& tree, std::span<const NodeId> order, Statistic stat) {
  StatTracker tracker(tree.size());
  std::vector<char> present(static_cast<std::size_t>(tree.size()), 0);
  std::vector<double> values;
  values.reserve(order.size());
  replay(tree, order, present, tracker, stat, &values);
  return values;
}

TrajectoryStat interpolate_statistic(const Tree& tree, std::span<const NodeId> initial,
                                     Statistic stat, std::size_t samples, std::uint64_t seed) {
  if (samples < 1) throw Error(ErrorKind::InvalidArgument, kModule, "need at least one sample");
  const BridgeSampler bridge(tree, initial);
  const auto& start = bridge.initial();

  // Put the snapshot in an order where each node touches an earlier one.
  std::vector<NodeId> snapshot_order{start.front()};
  {
    std::vector<char> in_snapshot(static_cast<std::size_t>(tree.size()), 0), seen(in_snapshot);
    for (NodeId v : start) in_snapshot[v] = 1;
    seen[start.front()] = 1;
    for (std::size_t k = 0; k < snapshot_order.size(); ++k)
      for (NodeId w : tree.neighbors(snapshot_order[k]))
        if (in_snapshot[w] && !seen[w]) {
          seen[w] = 1;
          snapshot_order.push_back(w);
        }
  }
  StatTracker base(tree.size());
  std::vector<char> base_present(static_cast<std::size_t>(tree.size()), 0);
  replay(tree, snapshot_order, base_present, base, stat, nullptr);

  const std::size_t length = static_cast<std::size_t>(tree.size()) - start.size() + 1;
  std::vector<std::vector<double>> runs(samples);
  parallel_for(samples, [&](std::size_t s) {
    Rng rng = Rng::stream(seed, s);
    const auto order = bridge.sample(rng);
    StatTracker tracker = base;
    std::vector<char> present = base_present;
    auto& values = runs[s];
    values.reserve(length);
    values.push_back(tracker.value(stat));
    replay(tree, order, present, tracker, stat, &values);
  });

  TrajectoryStat out;
  out.samples = samples;
  const auto L = static_cast<Eigen::Index>(length);
  out.nodes.resize(L);
  out.mean.resize(L);
  out.lower.resize(L);
  out.upper.resize(L);
  std::vector<double> column(samples);
  for (Eigen::Index k = 0; k < L; ++k) {
    for (std::size_t s = 0; s < samples; ++s) column[s] = runs[s][static_cast<std::size_t>(k)];
    out.nodes[k] = static_cast<double>(start.size()) + static_cast<double>(k);
    std::sort(column.begin(), column.end());
    // Summed relative to the minimum so that a constant column has its exact
    // value as mean.
    double excess = 0.0;
    for (double x : column) excess += x - column.front();
    out.mean[k] = column.front() + excess / static_cast<double>(samples);
    out.lower[k] = quantile(column, 0.025);
    out.upper[k] = quantile(column, 0.975);
  }
  return out;
}

Eigen::VectorXd degree_baseline_times(const Tree& tree) {
  const NodeId n = tree.size();
  std::vector<NodeId> nodes(static_cast<std::size_t>(n));
  std::iota(nodes.begin(), nodes.end(), 0);
  std::stable_sort(nodes.begin(), nodes.end(),
                   [&](NodeId a, NodeId b) { return tree.degree(a) > tree.degree(b); });
  Eigen::VectorXd rank(n);
  for (NodeId pos = 0; pos < n; ++pos) rank[nodes[pos]] = pos;
  return rank;
}

Eigen::VectorXd degree_midrank_times(const Tree& tree) {
  Eigen::VectorXd negated(tree.size());
  for (NodeId v = 0; v < tree.size(); ++v) negated[v] = -static_cast<double>(tree.degree(v));
  return average_ranks(negated);
}

double pearson_correlation(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const Eigen::ArrayXd dx = x.array() - x.mean();
  const Eigen::ArrayXd dy = y.array() - y.mean();
  const double denom = std::sqrt(dx.square().sum() * dy.square().sum());
  return denom > 0.0 ? (dx * dy).sum() / denom : kNaN;
}

double spearman_correlation(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  return pearson_correlation(average_ranks(x), average_ranks(y));
}

}  // namespace treearch

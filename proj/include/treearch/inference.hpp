#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "treearch/growth_models.hpp"
#include "treearch/history_sampler.hpp"
#include "treearch/tree.hpp"

namespace treearch {

// Ascending, evenly spaced grid lo, lo+step, ..., up to hi (inclusive within
// rounding).
Eigen::VectorXd make_grid(double lo, double hi, double step);
// "lo:hi:step".
Eigen::VectorXd parse_grid(std::string_view spec);
Eigen::VectorXd default_gamma_grid();  // -2:3:0.05

// S independent uniform histories; history s uses stream s of `seed`.
std::vector<History> draw_histories(const Tree& tree, std::size_t samples, std::uint64_t seed);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  bool contains(double x) const noexcept { return lower <= x && x <= upper; }
  bool overlaps(const Interval& o) const noexcept { return lower <= o.upper && o.lower <= upper; }
};

// Posterior over the kernel exponent on a grid, under a uniform prior.
struct KernelPosterior {
  Eigen::VectorXd grid;
  Eigen::VectorXd log_evidence;  // log P(G | gamma), Monte Carlo estimate
  Eigen::VectorXd std_error;     // standard error of log_evidence (NaN if S = 1)
  Eigen::VectorXd mass;          // normalized posterior masses
  double mean = 0.0;
  double map = 0.0;
  Interval ci50;
  Interval ci95;
  std::size_t samples = 0;

  // Equal-tailed interval with grid-point endpoints.
  Interval credible_interval(double mass) const;
};

KernelPosterior kernel_posterior(const Tree& tree, std::size_t samples, const Eigen::VectorXd& grid,
                                 std::uint64_t seed);
// Scores a given set of histories; with one true history this is the
// known-timeline fit.
KernelPosterior kernel_posterior(const Tree& tree, std::span<const History> histories,
                                 const Eigen::VectorXd& grid);

// A model for evidence computations. A kernel model without a fixed exponent
// is integrated over `gamma_grid` under a uniform prior (trapezoid rule).
struct Hypothesis {
  GrowthModel model;
  bool integrate_gamma = false;
  Eigen::VectorXd gamma_grid;

  // Model specs as for GrowthModel::parse, plus bare "kernel".
  static Hypothesis parse(std::string_view spec, const Eigen::VectorXd& grid = default_gamma_grid());
  std::string spec() const;

  // log P(G, H | hypothesis).
  double log_likelihood(const Tree& tree, const History& history) const;
};

struct BayesFactor {
  double log_K = 0.0;
  double std_error = 0.0;
  double log_evidence_a = 0.0;
  double log_evidence_b = 0.0;
  std::size_t samples = 0;
};

// log K = log P(G | A) - log P(G | B), both estimated from one shared set of
// uniform histories.
BayesFactor log_bayes_factor(const Tree& tree, const Hypothesis& a, const Hypothesis& b,
                             std::size_t samples, std::uint64_t seed);
BayesFactor log_bayes_factor(const Tree& tree, const Hypothesis& a, const Hypothesis& b,
                             std::span<const History> histories);

struct ReweightedTimes {
  Eigen::VectorXd mean;
  Eigen::VectorXd std_error;
  double effective_sample_size = 0.0;
  std::size_t samples = 0;
};

// Self-normalized importance sampling of arrival times under `model`, with the
// uniform history distribution as proposal. Throws Error(DegenerateWeights) if
// the effective sample size drops below 2.
ReweightedTimes reweighted_arrival_times(const Tree& tree, const GrowthModel& model,
                                         std::size_t samples, std::uint64_t seed);
ReweightedTimes reweighted_arrival_times(const Tree& tree, const GrowthModel& model,
                                         std::span<const History> histories);

enum class Statistic { NodeCount, ExcessDegree, MeanDegree, MaxDegree };
Statistic parse_statistic(std::string_view name);
std::string_view to_string(Statistic stat);

// Value of `stat` on the partial tree after each prefix of `order`: element
// k is the value with order[0..k] present. Nodes in `order` must form a
// growing connected subtree.
std::vector<double> statistic_along(const Tree& tree, std::span<const NodeId> order, Statistic stat);

struct TrajectoryStat {
  Eigen::VectorXd nodes;  // number of nodes present, |initial|..n
  Eigen::VectorXd mean;
  Eigen::VectorXd lower;  // 2.5% quantile across samples
  Eigen::VectorXd upper;  // 97.5% quantile
  std::size_t samples = 0;
};

TrajectoryStat interpolate_statistic(const Tree& tree, std::span<const NodeId> initial,
                                     Statistic stat, std::size_t samples, std::uint64_t seed);

// Position of each node when sorted by decreasing degree, ties by index.
Eigen::VectorXd degree_baseline_times(const Tree& tree);
// Same ranking, but nodes of equal degree share the mean of their positions.
Eigen::VectorXd degree_midrank_times(const Tree& tree);

double pearson_correlation(const Eigen::VectorXd& x, const Eigen::VectorXd& y);
// Pearson on average ranks.
double spearman_correlation(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

}  // namespace treearch

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "treearch/growth_models.hpp"
#include "treearch/inference.hpp"

// Desk-scale versions of the benchmark experiments. Shared by the
// `reproduce` subcommand and the acceptance suite.
namespace treearch::experiments {

struct CorrelationSummary {
  double mean = 0.0;
  double std_dev = 0.0;
};

// Correlation of estimated with true arrival times over an ensemble of
// uniform-attachment trees.
struct ArchaeologyResult {
  std::size_t trees = 0;
  NodeId n = 0;
  std::uint64_t seed = 0;
  CorrelationSummary posterior_pearson;
  CorrelationSummary degree_pearson;        // ties share their mean rank
  CorrelationSummary degree_index_pearson;  // ties broken by node index
  CorrelationSummary posterior_spearman;
  CorrelationSummary degree_spearman;
};

ArchaeologyResult archaeology(std::size_t trees, NodeId n, std::uint64_t seed);

struct KernelRecoveryRow {
  double gamma = 0.0;
  KernelPosterior posterior;
};

struct KernelRecoveryResult {
  NodeId n = 0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::vector<KernelRecoveryRow> rows;
};

// One Kernel(gamma) tree per exponent, fitted from S uniform histories.
KernelRecoveryResult kernel_recovery(const std::vector<double>& gammas, NodeId n, std::size_t samples,
                                     const Eigen::VectorXd& grid, std::uint64_t seed);

struct ModelSelectionRow {
  std::string generator;
  std::size_t replicate = 0;
  BayesFactor factor;
  bool correct = false;  // log K > 0 for the first generator, < 0 for the second
};

struct ModelSelectionResult {
  GrowthModel a;
  GrowthModel b;
  NodeId n = 0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::vector<ModelSelectionRow> rows;

  std::size_t correct() const;
  double mean_abs_log_K() const;
};

// `replicates` trees from each of a and b, scored with log K(a, b).
ModelSelectionResult model_selection(const GrowthModel& a, const GrowthModel& b, std::size_t replicates,
                                     NodeId n, std::size_t samples, std::uint64_t seed);

struct TimelineRow {
  Interval sampled;
  Interval known;
  bool overlap = false;
};

struct TimelineResult {
  double gamma = 0.0;
  NodeId n = 0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::vector<TimelineRow> rows;

  std::size_t overlapping() const;
};

// Kernel fits from sampled histories against fits from the true history.
TimelineResult timeline_agreement(double gamma, std::size_t replicates, NodeId n, std::size_t samples,
                                  const Eigen::VectorXd& grid, std::uint64_t seed);

struct TimingPoint {
  NodeId n = 0;
  double seconds = 0.0;
};

// Least-squares slope of log(seconds) against log(n).
double scaling_exponent(const std::vector<TimingPoint>& points);

// Fastest wall time over at least `repeats` calls on one uniform-attachment
// tree per size. Sampling is timed end to end, sampler construction included.
std::vector<TimingPoint> time_arrival_posterior(const std::vector<NodeId>& sizes, int repeats,
                                                std::uint64_t seed);
std::vector<TimingPoint> time_sample_history(const std::vector<NodeId>& sizes, int repeats,
                                             std::uint64_t seed);

}  // namespace treearch::experiments

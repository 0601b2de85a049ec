#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <numeric>

#include "support/trees.hpp"
#include "treearch/arrival_posterior.hpp"
#include "treearch/error.hpp"
#include "treearch/inference.hpp"
#include "treearch/oracle.hpp"

using namespace treearch;
using namespace treearch::testing;

namespace {

bool on_grid(const Eigen::VectorXd& grid, double x) {
  return (grid.array() == x).any();
}

}  // namespace

TEST_CASE("grids") {
  const Eigen::VectorXd g = make_grid(-1.0, 2.0, 0.05);
  CHECK(g.size() == 61);
  CHECK(g[0] == -1.0);
  CHECK(g[60] == doctest::Approx(2.0));
  CHECK(parse_grid("0:1:0.25").size() == 5);
  CHECK(parse_grid("0.5").size() == 1);
  CHECK(default_gamma_grid().size() == 101);
  CHECK_THROWS_AS(parse_grid("1:0:0.1"), Error);
  CHECK_THROWS_AS(parse_grid("0:1:0"), Error);
  CHECK_THROWS_AS(parse_grid("a:b:c"), Error);
}

TEST_CASE("kernel posterior") {
  Rng rng(4);
  const Tree t = random_tree(60, rng);
  SUBCASE("single grid point carries all the mass") {
    Eigen::VectorXd grid(1);
    grid << 0.7;
    const KernelPosterior post = kernel_posterior(t, 20, grid, 1);
    CHECK(post.mass[0] == 1.0);
    CHECK(post.mean == 0.7);
    CHECK(post.map == 0.7);
    CHECK(post.ci95.lower == 0.7);
    CHECK(post.ci95.upper == 0.7);
  }
  SUBCASE("masses, summaries and nested intervals") {
    const KernelPosterior post = kernel_posterior(t, 50, make_grid(-1.0, 2.0, 0.05), 2);
    CHECK(post.samples == 50);
    CHECK(std::abs(post.mass.sum() - 1.0) < 1e-12);
    CHECK(post.mass.minCoeff() >= 0.0);
    CHECK(on_grid(post.grid, post.map));
    for (double level : {0.5, 0.8, 0.95, 0.99}) {
      const Interval ci = post.credible_interval(level);
      CHECK(on_grid(post.grid, ci.lower));
      CHECK(on_grid(post.grid, ci.upper));
      CHECK(ci.lower <= ci.upper);
    }
    CHECK(post.ci95.lower <= post.ci50.lower);
    CHECK(post.ci50.upper <= post.ci95.upper);
    CHECK(post.ci95.contains(post.mean));
    CHECK((post.std_error.array() >= 0.0).all());
  }
  SUBCASE("reproducible for a seed, independent of thread count") {
    const Eigen::VectorXd grid = make_grid(0.0, 1.0, 0.25);
    ::setenv("TREEARCH_THREADS", "1", 1);
    const KernelPosterior a = kernel_posterior(t, 40, grid, 9);
    ::setenv("TREEARCH_THREADS", "4", 1);
    const KernelPosterior b = kernel_posterior(t, 40, grid, 9);
    ::unsetenv("TREEARCH_THREADS");
    CHECK(a.log_evidence == b.log_evidence);
    CHECK(a.mass == b.mass);
    CHECK(kernel_posterior(t, 40, grid, 10).log_evidence != a.log_evidence);
  }
  SUBCASE("negligible grid points do not move the posterior") {
    const Eigen::VectorXd grid = make_grid(-0.5, 1.5, 0.25);
    Eigen::VectorXd extended(grid.size() + 1);
    extended << grid, 40.0;
    const KernelPosterior a = kernel_posterior(t, 30, grid, 3);
    const KernelPosterior b = kernel_posterior(t, 30, extended, 3);
    CHECK(b.mass[grid.size()] < 1e-6);
    CHECK((a.mass - b.mass.head(grid.size())).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("stars favour larger exponents than paths") {
  const Tree s = star(49);
  const Tree p = path(50);
  const KernelPosterior ps = kernel_posterior(s, 30, default_gamma_grid(), 1);
  const KernelPosterior pp = kernel_posterior(p, 30, default_gamma_grid(), 1);
  CHECK(ps.mean > pp.mean);
  // Direct comparison of the evidence at three exponents.
  Eigen::VectorXd g(3);
  g << 0.0, 1.0, 2.0;
  const KernelPosterior es = kernel_posterior(s, 30, g, 2);
  const KernelPosterior ep = kernel_posterior(p, 30, g, 2);
  CHECK(es.log_evidence[2] - es.log_evidence[0] > ep.log_evidence[2] - ep.log_evidence[0]);
  CHECK(es.log_evidence[2] > es.log_evidence[1]);
  CHECK(ep.log_evidence[0] > ep.log_evidence[2]);
}

TEST_CASE("Monte Carlo evidence matches exact enumeration") {
  Rng rng(6);
  const Tree t = random_tree(7, rng);
  Eigen::VectorXd grid(4);
  grid << 0.0, 0.5, 1.0, 2.0;
  const KernelPosterior post = kernel_posterior(t, 10000, grid, 5);
  for (int k = 0; k < 4; ++k) {
    const double exact = std::log(oracle::exact_kernel_likelihood_sum(t, grid[k]));
    CHECK(std::abs(post.log_evidence[k] - exact) < 3 * post.std_error[k] + 1e-12);
  }
  // Uniform attachment: every history has the same likelihood, so the
  // estimate is exact.
  CHECK(post.std_error[0] < 1e-12);
}

TEST_CASE("standard error shrinks as one over root S") {
  Rng rng(8);
  const Tree t = random_tree(40, rng);
  Eigen::VectorXd grid(1);
  grid << 1.5;
  double small = 0.0, large = 0.0;
  for (std::uint64_t rep = 0; rep < 10; ++rep) {
    small += kernel_posterior(t, 100, grid, 100 + rep).std_error[0];
    large += kernel_posterior(t, 1600, grid, 200 + rep).std_error[0];
  }
  const double ratio = small / large;
  CHECK(ratio > 3.0);
  CHECK(ratio < 5.3);
}

TEST_CASE("hypotheses") {
  CHECK(Hypothesis::parse("kernel").integrate_gamma);
  CHECK_FALSE(Hypothesis::parse("kernel:gamma=1").integrate_gamma);
  CHECK(Hypothesis::parse("kernel:gamma=1").model == GrowthModel::kernel(1.0));
  CHECK(Hypothesis::parse("redirection:r=0.5").model == GrowthModel::redirection(0.5));
  CHECK(Hypothesis::parse("kernel:gamma=1").spec() == "kernel:gamma=1");
  Eigen::VectorXd one(1);
  one << 1.0;
  Rng rng(2);
  const Tree t = random_tree(30, rng);
  const History h = sample_history(t, 1);
  const double fixed = Hypothesis::parse("kernel:gamma=1").log_likelihood(t, h);
  CHECK(Hypothesis::parse("kernel", one).log_likelihood(t, h) == doctest::Approx(fixed).epsilon(1e-12));
  // Integrated over a grid the value lies between the grid extremes.
  Eigen::VectorXd two(2);
  two << 0.0, 2.0;
  const double lo = Hypothesis::parse("kernel:gamma=0").log_likelihood(t, h);
  const double hi = Hypothesis::parse("kernel:gamma=2").log_likelihood(t, h);
  const double mixed = Hypothesis::parse("kernel", two).log_likelihood(t, h);
  CHECK(mixed <= std::max(lo, hi) + 1e-12);
  CHECK(mixed >= std::min(lo, hi) - 1e-12);
}

TEST_CASE("Bayes factors") {
  Rng rng(12);
  const Tree t = random_tree(80, rng);
  const auto a = Hypothesis::parse("kernel:gamma=1");
  const auto b = Hypothesis::parse("redirection:r=0.5");
  const BayesFactor same = log_bayes_factor(t, a, a, 30, 1);
  CHECK(same.log_K == 0.0);
  const BayesFactor ab = log_bayes_factor(t, a, b, 30, 1);
  const BayesFactor ba = log_bayes_factor(t, b, a, 30, 1);
  CHECK(ab.log_K == -ba.log_K);
  CHECK(ab.std_error == doctest::Approx(ba.std_error));
  CHECK(ab.log_K == doctest::Approx(ab.log_evidence_a - ab.log_evidence_b).epsilon(1e-12));
  CHECK(ab.samples == 30);
  // Uniform against Kernel(0) agrees exactly.
  CHECK(log_bayes_factor(t, Hypothesis::parse("uniform"), Hypothesis::parse("kernel:gamma=0"), 20, 3).log_K == 0.0);
}

TEST_CASE("reweighted arrival times") {
  Rng rng(14);
  const Tree t = random_tree(40, rng);
  const std::vector<History> hs = draw_histories(t, 200, 7);
  SUBCASE("uniform weights give the plain sample mean") {
    const ReweightedTimes r = reweighted_arrival_times(t, GrowthModel::uniform(), hs);
    Eigen::VectorXd plain = Eigen::VectorXd::Zero(40);
    for (const auto& h : hs)
      for (NodeId v = 0; v < 40; ++v) plain[v] += h.arrival[v];
    plain /= 200.0;
    CHECK((r.mean - plain).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(r.effective_sample_size == doctest::Approx(200.0));
  }
  SUBCASE("Kernel(0) is identical to uniform") {
    const ReweightedTimes u = reweighted_arrival_times(t, GrowthModel::uniform(), hs);
    const ReweightedTimes k = reweighted_arrival_times(t, GrowthModel::kernel(0.0), hs);
    CHECK(u.mean == k.mean);
    CHECK(u.std_error == k.std_error);
    CHECK(u.effective_sample_size == k.effective_sample_size);
  }
  SUBCASE("3-path middle node converges to 1/2") {
    const Tree p = parse_edge_list("a b\nb c");
    const ReweightedTimes r = reweighted_arrival_times(p, GrowthModel::uniform(), 20000, 3);
    const NodeId b = p.index_of("b");
    CHECK(std::abs(r.mean[b] - 0.5) < 3 * r.std_error[b]);
    CHECK(r.std_error[b] == doctest::Approx(0.5 / std::sqrt(20000.0)).epsilon(0.02));
  }
  SUBCASE("agrees with the exact posterior under uniform attachment") {
    const ReweightedTimes r = reweighted_arrival_times(t, GrowthModel::uniform(), 5000, 4);
    const Eigen::VectorXd exact = posterior_mean_times(arrival_posterior(t));
    int outside = 0;
    for (NodeId v = 0; v < 40; ++v) outside += std::abs(r.mean[v] - exact[v]) > 4 * r.std_error[v];
    CHECK(outside == 0);
  }
  SUBCASE("degenerate weights are reported") {
    Rng big_rng(1);
    const Tree big = random_tree(2000, big_rng);
    try {
      reweighted_arrival_times(big, GrowthModel::kernel(3.0), 10, 1);
      FAIL("no error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::DegenerateWeights);
      CHECK(e.is_numerical());
    }
  }
}

TEST_CASE("statistics along a history") {
  const Tree s = star(3);
  const std::vector<NodeId> order{1, 0, 2, 3};
  const auto count = statistic_along(s, order, Statistic::NodeCount);
  CHECK(count == std::vector<double>{1, 2, 3, 4});
  const auto maxdeg = statistic_along(s, order, Statistic::MaxDegree);
  CHECK(maxdeg == std::vector<double>{0, 1, 2, 3});
  const auto mean = statistic_along(s, order, Statistic::MeanDegree);
  CHECK(mean[3] == doctest::Approx(1.5));
  // Star with three leaves: <k> = 1.5, <k^2> = 3, q = (3 - 1.5) / 1.5 = 1.
  const auto q = statistic_along(s, order, Statistic::ExcessDegree);
  CHECK(q[3] == doctest::Approx(1.0));
  CHECK(parse_statistic("excess-degree") == Statistic::ExcessDegree);
  CHECK(to_string(Statistic::MaxDegree) == "max-degree");
  CHECK_THROWS_AS(parse_statistic("diameter"), Error);
  const std::vector<NodeId> broken{1, 2, 0, 3};
  CHECK_THROWS_AS(statistic_along(s, broken, Statistic::NodeCount), Error);
}

TEST_CASE("interpolation") {
  Rng rng(30);
  const Tree t = random_tree(50, rng);
  const History h = sample_history(t, 2);
  const std::vector<NodeId> initial(h.order.begin(), h.order.begin() + 10);
  SUBCASE("node count is forced") {
    const TrajectoryStat tr = interpolate_statistic(t, initial, Statistic::NodeCount, 50, 1);
    REQUIRE(tr.mean.size() == 41);
    for (int k = 0; k <= 40; ++k) {
      CHECK(tr.nodes[k] == 10 + k);
      CHECK(tr.mean[k] == 10 + k);
      CHECK(tr.lower[k] == tr.upper[k]);
    }
  }
  SUBCASE("bands bracket the mean and end at the full tree") {
    const TrajectoryStat tr = interpolate_statistic(t, initial, Statistic::ExcessDegree, 100, 1);
    CHECK(((tr.lower.array() <= tr.mean.array() + 1e-12) && (tr.mean.array() <= tr.upper.array() + 1e-12)).all());
    const double final_q = statistic_along(t, h.order, Statistic::ExcessDegree).back();
    CHECK(tr.mean[40] == doctest::Approx(final_q));
    CHECK(tr.lower[40] == doctest::Approx(final_q));
  }
  SUBCASE("nothing to interpolate") {
    const TrajectoryStat tr = interpolate_statistic(t, h.order, Statistic::MaxDegree, 5, 1);
    CHECK(tr.mean.size() == 1);
    CHECK(tr.nodes[0] == 50);
  }
  SUBCASE("coverage of the excess-degree band on linear kernel trees") {
    int covered = 0;
    constexpr int instances = 400;
    for (std::uint64_t seed = 0; seed < instances; ++seed) {
      const GrownTree g = generate(GrowthModel::kernel(1.0), 100, 500 + seed);
      const std::vector<NodeId> first(g.history.order.begin(), g.history.order.begin() + 20);
      const TrajectoryStat tr = interpolate_statistic(g.tree, first, Statistic::ExcessDegree, 200, seed);
      const double truth = statistic_along(g.tree, g.history.order, Statistic::ExcessDegree)[79];
      REQUIRE(tr.nodes[60] == 80);
      covered += tr.lower[60] <= truth && truth <= tr.upper[60];
    }
    CHECK(covered >= instances * 9 / 10);
  }
}

TEST_CASE("degree baseline") {
  const Eigen::VectorXd s = degree_baseline_times(star(5));
  CHECK(s[0] == 0.0);
  CHECK(s.tail(5).minCoeff() == 1.0);
  const Eigen::VectorXd p4 = degree_baseline_times(path(4));
  CHECK(std::max(p4[1], p4[2]) < std::min(p4[0], p4[3]));
  // Path 0-1-2: the two ends tie and the lower index wins.
  const Eigen::VectorXd p3 = degree_baseline_times(path(3));
  CHECK(p3[1] == 0.0);
  CHECK(p3[0] == 1.0);
  CHECK(p3[2] == 2.0);
}

TEST_CASE("correlations") {
  Eigen::VectorXd x(5), y(5), z(5);
  x << 1, 2, 3, 4, 5;
  y << 2, 4, 6, 8, 10;
  z << 1, 4, 9, 16, 25;
  CHECK(pearson_correlation(x, y) == doctest::Approx(1.0));
  CHECK(pearson_correlation(x, -y) == doctest::Approx(-1.0));
  CHECK(pearson_correlation(x, z) < 1.0);
  CHECK(spearman_correlation(x, z) == doctest::Approx(1.0));
  Eigen::VectorXd ties(4), other(4);
  ties << 1, 1, 2, 2;
  other << 1, 2, 3, 4;
  CHECK(spearman_correlation(ties, other) == doctest::Approx(pearson_correlation(Eigen::Vector4d(1.5, 1.5, 3.5, 3.5), other)));
}

TEST_CASE("posterior means beat the degree baseline on uniform trees") {
  double posterior = 0.0, baseline = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const GrownTree g = generate(GrowthModel::uniform(), 100, seed);
    Eigen::VectorXd truth(100);
    for (NodeId v = 0; v < 100; ++v) truth[v] = g.history.arrival[v];
    posterior += spearman_correlation(posterior_mean_times(arrival_posterior(g.tree)), truth);
    baseline += spearman_correlation(degree_baseline_times(g.tree), truth);
  }
  CHECK(posterior > baseline);
}

TEST_CASE("degree midranks") {
  const Eigen::VectorXd s = degree_midrank_times(star(4));
  CHECK(s[0] == 0.0);
  for (int leaf = 1; leaf <= 4; ++leaf) CHECK(s[leaf] == 2.5);
  const Eigen::VectorXd p = degree_midrank_times(path(4));
  CHECK(p[1] == 0.5);
  CHECK(p[2] == 0.5);
  CHECK(p[0] == 2.5);
}

#include <doctest.h>

#include <chrono>
#include <cmath>

#include "support/trees.hpp"
#include "treearch/arrival_posterior.hpp"
#include "treearch/oracle.hpp"

using namespace treearch;
using namespace treearch::testing;

namespace {

// The component containing j once edge (i, j) is removed.
Tree branch_of(const Tree& t, NodeId i, NodeId j) {
  std::vector<NodeId> index(static_cast<std::size_t>(t.size()), kNoNode);
  std::vector<NodeId> stack{j};
  std::vector<IndexEdge> edges;
  index[j] = 0;
  NodeId next = 1;
  while (!stack.empty()) {
    const NodeId v = stack.back();
    stack.pop_back();
    for (NodeId w : t.neighbors(v)) {
      if ((v == j && w == i) || index[w] != kNoNode) continue;
      index[w] = next++;
      edges.emplace_back(index[v], index[w]);
      stack.push_back(w);
    }
  }
  return next == 1 ? Tree::single() : Tree::from_index_edges(next, edges);
}

void check_against_oracle(const Tree& t) {
  const NodeId n = t.size();
  const auto e = oracle::enumerate_histories(t);
  const ArrivalPosterior post = arrival_posterior(t);
  CHECK(std::abs(post.log_Z - std::log(static_cast<double>(e.Z))) < 1e-9);
  for (NodeId i = 0; i < n; ++i)
    for (NodeId time = 0; time < n; ++time) {
      const auto c = e.arrival_counts[i][time];
      if (c == 0) {
        CHECK(post.P(i, time) == 0.0);
      } else {
        const double exact = std::log(static_cast<double>(c) / static_cast<double>(e.Z));
        CHECK(std::abs(std::log(post.P(i, time)) - exact) < 1e-9);
      }
    }
}

}  // namespace

TEST_CASE("posterior of the 3-path") {
  const Tree t = parse_edge_list("a b\nb c");
  const ArrivalPosterior post = arrival_posterior(t);
  const NodeId a = t.index_of("a"), b = t.index_of("b"), c = t.index_of("c");
  CHECK(post.P(b, 0) == doctest::Approx(0.5));
  CHECK(post.P(b, 1) == doctest::Approx(0.5));
  CHECK(post.P(b, 2) == 0.0);
  for (NodeId end : {a, c}) {
    CHECK(post.P(end, 0) == doctest::Approx(0.25));
    CHECK(post.P(end, 1) == doctest::Approx(0.25));
    CHECK(post.P(end, 2) == doctest::Approx(0.5));
  }
  const Eigen::VectorXd mean = posterior_mean_times(post);
  CHECK(mean[b] == doctest::Approx(0.5));
  CHECK(mean[a] == doctest::Approx(1.25));
  CHECK(mean[c] == doctest::Approx(1.25));
}

TEST_CASE("posterior of a star and of two nodes") {
  const ArrivalPosterior s = arrival_posterior(star(3));
  CHECK(s.P(0, 0) == doctest::Approx(0.5));
  CHECK(s.P(0, 1) == doctest::Approx(0.5));
  CHECK(s.P(0, 2) == 0.0);
  CHECK(s.P(0, 3) == 0.0);
  CHECK(posterior_mean_times(s)[0] == doctest::Approx(0.5));

  const ArrivalPosterior two = arrival_posterior(path(2));
  CHECK((two.P.array() - 0.5).abs().maxCoeff() < 1e-15);
  CHECK(posterior_mean_times(two).isApproxToConstant(0.5));

  const ArrivalPosterior one = arrival_posterior(Tree::single());
  CHECK(one.P.size() == 1);
  CHECK(one.P(0, 0) == 1.0);
}

TEST_CASE("h_exclude") {
  const Tree p = parse_edge_list("a b\nb c");
  const LogFactorials lf(32);
  SUBCASE("3-path with both sides removed") {
    const EdgeLogCounts c = edge_log_counts(p, lf);
    CHECK(h_exclude(p, c, lf, p.index_of("a"), p.index_of("c"), p.index_of("b")) == doctest::Approx(0.0));
  }
  SUBCASE("star centre keeps one leaf") {
    const Tree s = star(3);
    const EdgeLogCounts c = edge_log_counts(s, lf);
    CHECK(h_exclude(s, c, lf, 1, 2, 0) == doctest::Approx(0.0));
  }
  SUBCASE("closed form equals the product form") {
    Rng rng(12);
    const LogFactorials big(64);
    for (int rep = 0; rep < 100; ++rep) {
      const Tree t = random_tree(3 + static_cast<NodeId>(rng.below(48)), rng);
      const EdgeLogCounts c = edge_log_counts(t, big);
      for (NodeId j = 0; j < t.size(); ++j) {
        const auto nb = t.neighbors(j);
        for (NodeId i : nb)
          for (NodeId k : nb) {
            if (i == k) continue;
            const NodeId m = c.size[t.slot_of(k, j)] - c.size[t.slot_of(j, i)];
            double direct = big(m - 1);
            for (NodeId l : nb)
              if (l != i && l != k) direct += c.at(t, j, l) - big(c.size[t.slot_of(j, l)]);
            CHECK(std::abs(h_exclude(t, c, big, i, k, j) - direct) < 1e-9);
          }
      }
    }
  }
}

TEST_CASE("oracle equivalence for every shape up to 8 nodes") {
  for (NodeId n = 1; n <= 8; ++n)
    for (const Tree& t : all_shapes(n)) check_against_oracle(t);
}

TEST_CASE("oracle equivalence on random labelled trees") {
  Rng rng(99);
  for (int rep = 0; rep < 40; ++rep) check_against_oracle(random_tree(2 + static_cast<NodeId>(rng.below(8)), rng));
}

TEST_CASE("doubly stochastic, seed column, symmetric rows") {
  Rng rng(31);
  for (int rep = 0; rep < 10; ++rep) {
    const Tree t = random_tree(20 + static_cast<NodeId>(rng.below(180)), rng);
    const ArrivalPosterior post = arrival_posterior(t);
    CHECK((post.P.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-9);
    CHECK((post.P.colwise().sum().array() - 1.0).abs().maxCoeff() < 1e-9);
    CHECK((post.P.col(0) - seed_probabilities(t).p).cwiseAbs().maxCoeff() < 1e-10);
  }
  const ArrivalPosterior p = arrival_posterior(path(40));
  for (int i = 0; i < 40; ++i) CHECK((p.P.row(i) - p.P.row(39 - i)).cwiseAbs().maxCoeff() < 1e-12);
  const ArrivalPosterior s = arrival_posterior(star(30));
  for (int leaf = 2; leaf <= 30; ++leaf) CHECK((s.P.row(leaf) - s.P.row(1)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("branch cumulative counts") {
  Rng rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    const Tree t = random_tree(2 + static_cast<NodeId>(rng.below(60)), rng);
    const LogFactorials lf(static_cast<std::size_t>(t.size()));
    const EdgeLogCounts c = edge_log_counts(t, lf);
    const BranchCumulative g = branch_cumulative(t, c, lf);
    for (std::size_t slot = 0; slot < t.slot_count(); ++slot) {
      const auto row = g[slot];
      CHECK(row.size() == static_cast<std::size_t>(c.size[slot]));
      CHECK(row[0] == c.log_h[slot]);
      for (std::size_t k = 1; k < row.size(); ++k) CHECK(row[k] >= row[k - 1]);
    }
    // Once t reaches the branch size every branch history is counted.
    for (NodeId i = 0; i < t.size(); ++i)
      for (NodeId j : t.neighbors(i)) {
        const auto row = g[t.slot_of(i, j)];
        CHECK(std::abs(row.back() - total_log_histories(branch_of(t, i, j))) < 1e-9);
      }
  }
}

TEST_CASE("credible intervals") {
  const Tree t = parse_edge_list("a b\nb c");
  const ArrivalPosterior post = arrival_posterior(t);
  const auto ci50 = credible_intervals(post, 0.5);
  const auto ci95 = credible_intervals(post, 0.95);
  const NodeId a = t.index_of("a"), b = t.index_of("b");
  CHECK(ci50[a].lower == 0);
  CHECK(ci50[a].upper == 2);
  CHECK(ci95[b].lower == 0);
  CHECK(ci95[b].upper == 1);
  Rng rng(1);
  const ArrivalPosterior big = arrival_posterior(random_tree(80, rng));
  const auto narrow = credible_intervals(big, 0.5);
  const auto wide = credible_intervals(big, 0.95);
  for (std::size_t i = 0; i < narrow.size(); ++i) {
    CHECK(wide[i].lower <= narrow[i].lower);
    CHECK(narrow[i].upper <= wide[i].upper);
  }
}

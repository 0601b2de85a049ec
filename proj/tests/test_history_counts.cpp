#include <doctest.h>

#include <cmath>

#include "support/trees.hpp"
#include "treearch/history_counts.hpp"
#include "treearch/oracle.hpp"

using namespace treearch;
using namespace treearch::testing;

TEST_CASE("seed probabilities of small trees") {
  SUBCASE("3-path") {
    const Tree t = parse_edge_list("a b\nb c");
    const SeedDistribution s = seed_probabilities(t);
    CHECK(s.p[t.index_of("a")] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(s.p[t.index_of("b")] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(s.p[t.index_of("c")] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(std::exp(s.log_Z) == doctest::Approx(4.0).epsilon(1e-12));
  }
  SUBCASE("star with three leaves") {
    const SeedDistribution s = seed_probabilities(star(3));
    CHECK(s.p[0] == doctest::Approx(0.5).epsilon(1e-14));
    for (int leaf = 1; leaf <= 3; ++leaf) CHECK(s.p[leaf] == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
    CHECK(std::exp(s.log_Z) == doctest::Approx(12.0).epsilon(1e-12));
  }
  SUBCASE("single node") {
    const SeedDistribution s = seed_probabilities(Tree::single());
    CHECK(s.p.size() == 1);
    CHECK(s.p[0] == 1.0);
    CHECK(s.log_Z == 0.0);
  }
  SUBCASE("two nodes") {
    CHECK(std::exp(total_log_histories(path(2))) == doctest::Approx(2.0).epsilon(1e-14));
  }
}

TEST_CASE("history count of the three-branch example is 120") {
  const Tree t = three_branch_tree();
  const LogFactorials lf(7);
  const EdgeLogCounts c = edge_log_counts(t, lf);
  CHECK(std::exp(log_seed_count(t, c, lf, 0)) == doctest::Approx(120.0).epsilon(1e-12));
  CHECK(std::exp(c.at(t, 0, 4)) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::exp(c.at(t, 0, 2)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("edge log counts") {
  SUBCASE("edges into leaves have log count zero") {
    Rng rng(4);
    const Tree t = random_tree(30, rng);
    const EdgeLogCounts c = edge_log_counts(t);
    for (NodeId i = 0; i < t.size(); ++i)
      for (NodeId j : t.neighbors(i))
        if (t.degree(j) == 1) CHECK(c.at(t, i, j) == 0.0);
  }
  SUBCASE("3-path") {
    const Tree t = parse_edge_list("a b\nb c");
    const EdgeLogCounts c = edge_log_counts(t);
    CHECK(c.at(t, t.index_of("a"), t.index_of("b")) == doctest::Approx(0.0));
  }
  SUBCASE("non-negative, zero exactly when the branch has one history") {
    Rng rng(6);
    for (int rep = 0; rep < 30; ++rep) {
      const Tree t = random_tree(2 + static_cast<NodeId>(rng.below(7)), rng);
      const EdgeLogCounts c = edge_log_counts(t);
      const auto e = oracle::enumerate_histories(t);
      for (NodeId i = 0; i < t.size(); ++i)
        for (NodeId j : t.neighbors(i)) {
          const double lh = c.at(t, i, j);
          CHECK(lh >= -1e-12);
          // h_{i->j} * h_{j->i} * C(n-2, n_{i->j}-1) histories start with the pair (i, j).
          const NodeId nij = c.size[t.slot_of(i, j)];
          std::uint64_t pair_first = 0;
          for (const auto& h : e.histories)
            if (h[0] == i && h[1] == j) ++pair_first;
          const double expected = std::log(static_cast<double>(pair_first)) -
                                  std::log(std::tgamma(static_cast<double>(t.size() - 1)) /
                                           std::tgamma(static_cast<double>(nij)) /
                                           std::tgamma(static_cast<double>(t.size() - nij))) -
                                  c.at(t, j, i);
          CHECK(lh == doctest::Approx(expected).epsilon(1e-9));
        }
    }
  }
}

TEST_CASE("seed probabilities do not depend on the propagation root") {
  Rng rng(17);
  for (int rep = 0; rep < 30; ++rep) {
    const Tree t = random_tree(2 + static_cast<NodeId>(rng.below(200)), rng);
    const SeedDistribution a = seed_probabilities(t, 0);
    const SeedDistribution b = seed_probabilities(t, static_cast<NodeId>(rng.below(t.size())));
    CHECK((a.p - b.p).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(a.log_Z - b.log_Z) < 1e-9);
    CHECK(std::abs(a.p.sum() - 1.0) < 1e-12);
    CHECK(a.p.minCoeff() > 0.0);
  }
}

TEST_CASE("neighbour ratio identity") {
  Rng rng(21);
  for (int rep = 0; rep < 20; ++rep) {
    const Tree t = random_tree(2 + static_cast<NodeId>(rng.below(300)), rng);
    const SeedDistribution s = seed_probabilities(t, static_cast<NodeId>(rng.below(t.size())));
    const auto sizes = branch_sizes(t);
    const double n = t.size();
    for (NodeId i = 0; i < t.size(); ++i)
      for (std::size_t slot = t.first_slot(i); slot < t.end_slot(i); ++slot) {
        const NodeId j = t.head(slot);
        const double nij = sizes[slot];
        CHECK(std::abs((s.log_p[j] - s.log_p[i]) - (std::log(nij) - std::log(n - nij))) < 1e-12);
      }
  }
}

TEST_CASE("log Z from every reference node and from the seed counts") {
  Rng rng(2);
  const Tree t = random_tree(150, rng);
  const LogFactorials lf(150);
  const EdgeLogCounts c = edge_log_counts(t, lf);
  std::vector<double> log_h(static_cast<std::size_t>(t.size()));
  for (NodeId i = 0; i < t.size(); ++i) log_h[i] = log_seed_count(t, c, lf, i);
  const double from_counts = log_sum_exp(log_h);
  for (NodeId r = 0; r < t.size(); r += 7) CHECK(std::abs(total_log_histories(t, r) - from_counts) < 1e-9);
}

TEST_CASE("oracle equivalence for all shapes up to 8 nodes") {
  for (NodeId n = 1; n <= 8; ++n)
    for (const Tree& t : all_shapes(n)) {
      const auto e = oracle::enumerate_histories(t);
      const SeedDistribution s = seed_probabilities(t);
      CHECK(std::abs(s.log_Z - std::log(static_cast<double>(e.Z))) < 1e-9);
      for (NodeId i = 0; i < n; ++i) {
        const double exact = std::log(static_cast<double>(e.seed_counts[i]) / static_cast<double>(e.Z));
        CHECK(std::abs(s.log_p[i] - exact) < 1e-9);
      }
    }
}

TEST_CASE("automorphic nodes share seed probability") {
  const SeedDistribution p = seed_probabilities(path(9));
  for (int i = 0; i < 9; ++i) CHECK(p.p[i] == doctest::Approx(p.p[8 - i]).epsilon(1e-13));
  const SeedDistribution s = seed_probabilities(star(12));
  for (int leaf = 2; leaf <= 12; ++leaf) CHECK(s.p[leaf] == doctest::Approx(s.p[1]).epsilon(1e-13));
}

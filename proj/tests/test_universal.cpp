#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tubed/universal.hpp"

using namespace tubed;

namespace {

Graph graph_from(std::size_t n, std::vector<std::pair<Vertex, Vertex>> e) { return Graph::from_edges(n, std::move(e)); }

std::optional<std::vector<Vertex>> brute_force(const Graph& delta, const Graph& gamma, int K,
                                               std::optional<Vertex> root_image, std::size_t* total = nullptr) {
  return test::brute_force_regular_map(delta, gamma, K, root_image, total);
}

Graph random_connected(Rng& rng, std::size_t n, std::size_t extra, std::size_t max_degree) {
  return test::random_connected_graph(rng, n, extra, max_degree);
}

}  // namespace

TEST(Ruler, Examples) {
  EXPECT_EQ(ruler_sequence(1), 1);
  EXPECT_EQ(ruler_sequence(8), 4);
  EXPECT_EQ(ruler_sequence(12), 3);
  EXPECT_THROW(ruler_sequence(0), DomainError);
}

TEST(Ruler, MatchesRecursiveGeneration) {
  // R_1 = (1), R_{j+1} = R_j, j + 1, R_j: the displayed sequence, built
  // without valuations.
  std::vector<int> seq{1};
  for (int j = 1; j < 6; ++j) {
    std::vector<int> next = seq;
    next.push_back(j + 1);
    next.insert(next.end(), seq.begin(), seq.end());
    seq = next;
  }
  ASSERT_EQ(seq.size(), 63u);
  const std::vector<int> shown{1, 2, 1, 3, 1, 2, 1, 4, 1};
  for (std::size_t i = 0; i < shown.size(); ++i) EXPECT_EQ(seq[i], shown[i]);
  for (std::size_t i = 0; i < seq.size(); ++i) EXPECT_EQ(ruler_sequence(i + 1), seq[i]) << i + 1;
  for (int n = 1; n <= 6; ++n) {
    // n first appears at 2^(n-1) and then every 2^n.
    std::uint64_t first = 0;
    for (std::uint64_t k = 1; k <= 64; ++k)
      if (ruler_sequence(k) == n) {
        if (first == 0) first = k;
        EXPECT_EQ((k - first) % (std::uint64_t{1} << n), 0u);
      }
    EXPECT_EQ(first, std::uint64_t{1} << (n - 1));
  }
}

TEST(RegularMapCheck, Examples) {
  const Graph g = Graph::path(6);
  EXPECT_TRUE(regular_map_check(g, g, 1, {0, 1, 2, 3, 4, 5}).ok);

  const Graph k3 = Graph::complete(3);
  const auto c = regular_map_check(k3, Graph::path(4), 2, {1, 1, 1});
  EXPECT_FALSE(c.ok);
  ASSERT_EQ(c.multiplicity.size(), 1u);
  EXPECT_EQ(c.multiplicity[0], 1u);
  EXPECT_TRUE(c.displacement.empty());

  std::vector<Vertex> doubled;
  for (Vertex i = 0; i < 10; ++i) doubled.push_back(2 * i);
  EXPECT_TRUE(regular_map_check(Graph::path(10), Graph::path(100), 2, doubled).ok);
  const auto far = regular_map_check(Graph::path(10), Graph::path(100), 1, doubled);
  EXPECT_EQ(far.displacement.size(), 9u);
}

TEST(RegularMapCheck, RejectsOutOfRangeAssignments) {
  EXPECT_THROW(regular_map_check(Graph::path(3), Graph::path(3), 1, {0, 1, 3}), InputError);
  EXPECT_THROW(regular_map_check(Graph::path(3), Graph::path(3), 1, {0, 1}), InputError);
}

TEST(ExistsRegularMap, TrivialInstances) {
  SearchOptions pin;
  pin.root_image = 4;
  const auto single = exists_regular_map(Graph::path(1), Graph::path(7), 1, pin);
  ASSERT_TRUE(single.found);
  EXPECT_EQ(single.assignment, std::vector<Vertex>{4});

  for (int K = 1; K <= 4; ++K) {
    std::vector<std::pair<Vertex, Vertex>> star;
    for (Vertex leaf = 1; leaf <= static_cast<Vertex>(K) + 1; ++leaf) star.emplace_back(0, leaf);
    const auto r = exists_regular_map(graph_from(static_cast<std::size_t>(K) + 2, star), Graph::path(1), K);
    EXPECT_FALSE(r.found);
    EXPECT_TRUE(r.exhausted);
  }
}

TEST(ExistsRegularMap, PathWithDiagonalIntoShortPath) {
  // P5 plus {1,4} (0-based {0,3}) into P3, K = 1: injective, impossible.
  const Graph delta = graph_from(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 3}});
  const Graph gamma = Graph::path(3);
  std::size_t total = 0;
  const auto oracle = brute_force(delta, gamma, 1, std::nullopt, &total);
  EXPECT_EQ(total, 243u);
  const auto r = exists_regular_map(delta, gamma, 1);
  EXPECT_EQ(r.found, oracle.has_value());
  EXPECT_FALSE(r.found);
  // K = 2 admits folding.
  const auto r2 = exists_regular_map(delta, gamma, 2);
  ASSERT_TRUE(r2.found);
  EXPECT_TRUE(regular_map_check(delta, gamma, 2, r2.assignment).ok);
  EXPECT_TRUE(brute_force(delta, gamma, 2, std::nullopt).has_value());
}

TEST(ExistsRegularMap, AgreesWithBruteForceOnRandomInstances) {
  Rng rng(99);
  std::size_t checked = 0, positives = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t ns = 2 + rng.below(6), nt = 1 + rng.below(6);
    if (std::pow(static_cast<double>(nt), static_cast<double>(ns)) > 1e6) continue;
    const Graph delta = random_connected(rng, ns, rng.below(4), 3);
    const Graph gamma = random_connected(rng, nt, rng.below(4), 4);
    const int K = 1 + static_cast<int>(rng.below(3));
    std::optional<Vertex> pin;
    if (rng.below(2)) pin = static_cast<Vertex>(rng.below(nt));
    SearchOptions so;
    so.root_image = pin;
    const auto r = exists_regular_map(delta, gamma, K, so);
    const auto oracle = brute_force(delta, gamma, K, pin);
    ASSERT_EQ(r.found, oracle.has_value()) << "trial " << trial;
    EXPECT_EQ(r.exhausted, !r.found);
    if (r.found) {
      ++positives;
      EXPECT_TRUE(regular_map_check(delta, gamma, K, r.assignment).ok);
      if (pin) EXPECT_EQ(r.assignment[0], *pin);
    }
    ++checked;
  }
  EXPECT_GT(checked, 200u);
  EXPECT_GT(positives, 20u);
  EXPECT_LT(positives, checked);
}

TEST(ExistsRegularMap, BudgetAndPreconditions) {
  SearchOptions tight;
  tight.node_budget = 10;
  EXPECT_THROW(exists_regular_map(Graph::path(12), Graph::complete(5), 3, tight), ResourceError);
  try {
    exists_regular_map(Graph::path(12), Graph::complete(5), 3, tight);
  } catch (const ResourceError& e) {
    EXPECT_NEAR(e.required(), 3 * 12 * std::log10(5.0), 1e-9);
  }
  EXPECT_THROW(exists_regular_map(graph_from(3, {{0, 1}}), Graph::path(3), 1), PreconditionError);
  SearchOptions bad;
  bad.root_image = 9;
  EXPECT_THROW(exists_regular_map(Graph::path(2), Graph::path(3), 1, bad), InputError);
  EXPECT_THROW(exists_regular_map(Graph::path(2), Graph::path(3), 0), DomainError);
}

TEST(CountBound, Examples) {
  EXPECT_EQ(count_bound(2, 1, 3, 1).graphs_count, 1);
  EXPECT_EQ(count_bound(2, 1, 3, 1).maps_upper, 64);
  EXPECT_EQ(count_bound(3, 2, 1, 5).maps_upper, 9 * 18);
  EXPECT_EQ(count_bound(3, 2, 1, 5).graphs_count, 120);
  EXPECT_THROW(count_bound(1, 1, 1, 1), PreconditionError);
  EXPECT_THROW(count_bound(2, 1, 1, 0), PreconditionError);
}

TEST(CountBound, FactorialCrossoverMatchesLgamma) {
  // Exact loop vs the log-gamma oracle, plus the exact bracket L-1, L.
  for (std::uint64_t k = 1; k <= 2; ++k)
    for (std::uint64_t S = 1; S <= 200; ++S) {
      const BigInt bound = maps_upper_bound(3, k, S);
      const std::uint64_t L = factorial_crossover(bound);
      const double log_bound = static_cast<double>(S) * (static_cast<double>(k) * std::log(3.0) +
                                                          std::log(static_cast<double>(k) * std::pow(3.0, k)));
      std::uint64_t oracle = 1;
      while (std::lgamma(static_cast<double>(oracle) + 1.0) <= log_bound) ++oracle;
      EXPECT_EQ(L, oracle) << "k=" << k << " S=" << S;
      EXPECT_GT(factorial(L), bound);
      EXPECT_LE(factorial(L - 1), bound);
    }
}

TEST(CountBound, QuarterCrossover) {
  // Along L = S/4 the factorial loses for all S <= 200.
  for (std::uint64_t k = 1; k <= 2; ++k) EXPECT_FALSE(quarter_crossover(3, k, 200).has_value());
  // It overtakes eventually; for d = 3, k = 1 the lgamma oracle places it.
  std::uint64_t oracle = 4;
  while (std::lgamma(static_cast<double>(oracle / 4) + 1.0) <= static_cast<double>(oracle) * 2.0 * std::log(3.0))
    ++oracle;
  const auto exact = quarter_crossover(3, 1, oracle + 8);
  ASSERT_TRUE(exact.has_value());
  EXPECT_EQ(*exact, oracle);
  EXPECT_GT(oracle, 60'000u);
}

TEST(DeltaLevel, PathTargetLevelOne) {
  const Graph gamma = Graph::path(50);
  const DeltaGraph d = build_delta(gamma, 1);
  ASSERT_EQ(d.levels.size(), 1u);
  const DeltaLevel& l = d.levels[0];
  EXPECT_EQ(l.S_prev, 0u);
  EXPECT_EQ(l.L, l.S / 4);
  EXPECT_TRUE(l.exhausted);
  EXPECT_GT(l.search_nodes, 0u);
  ASSERT_TRUE(l.root_image.has_value());
  EXPECT_EQ(*l.root_image, 0u);  // n_1 = 1
  EXPECT_TRUE(delta_invariant_violations(d).empty());

  // Independent oracle: every map into the ball of radius K (S - 1) around
  // the root image, which the displacement condition makes lossless.
  const Graph delta = d.graph();
  const auto ball = bfs_distances(gamma, 0, static_cast<int>(l.S) - 1);
  std::size_t reach = 0;
  for (int x : ball) reach += x != kUnreached;
  ASSERT_LE(std::pow(static_cast<double>(reach), static_cast<double>(l.S - 1)), 1e7);
  const Graph truncated = Graph::path(reach);
  std::size_t total = 0;
  EXPECT_FALSE(brute_force(delta, truncated, 1, Vertex{0}, &total).has_value());
  EXPECT_GT(total, 1u);

  const auto replay = replay_certificate(d, 0, gamma);
  EXPECT_FALSE(replay.found);
  EXPECT_EQ(replay.nodes, l.search_nodes);
}

TEST(DeltaLevel, InvariantsOnSeveralLevels) {
  // Complete graph K_3, root pinned by the ruler sequence: levels 1..3.
  DeltaOptions opts;
  opts.max_sk = 600;
  const Graph gamma = Graph::complete(3);
  const DeltaGraph d = build_delta(gamma, 3, opts);
  ASSERT_EQ(d.levels.size(), 3u);
  EXPECT_TRUE(delta_invariant_violations(d).empty());
  EXPECT_LE(d.graph().max_degree(), 3u);
  const auto b = d.boundaries();
  for (std::size_t m = 0; m + 1 < b.size(); ++m) EXPECT_LT(b[m], b[m + 1]);
  for (std::size_t m = 0; m < d.levels.size(); ++m) {
    EXPECT_EQ(*d.levels[m].root_image, static_cast<Vertex>(ruler_sequence(m + 1) - 1));
    const auto replay = replay_certificate(d, m, gamma);
    EXPECT_FALSE(replay.found);
    EXPECT_EQ(replay.nodes, d.levels[m].search_nodes);
  }
  // Deterministic under a fixed seed.
  const DeltaGraph again = build_delta(gamma, 3, opts);
  EXPECT_EQ(again.diagonals(), d.diagonals());
}

TEST(DeltaLevel, InvariantCheckerFlagsBrokenGraphs) {
  DeltaGraph d = build_delta(Graph::path(50), 1);
  DeltaGraph bad = d;
  bad.levels[0].matching[0] = bad.levels[0].matching.size() > 1 ? bad.levels[0].matching[1] : 5;
  EXPECT_FALSE(delta_invariant_violations(bad).empty());
  DeltaGraph wide = d;
  wide.levels[0].L = wide.levels[0].S;
  EXPECT_FALSE(delta_invariant_violations(wide).empty());
}

TEST(DeltaLevel, BudgetExhaustionReportsLargestSpan) {
  // A complete target on 64 vertices hosts every graph on <= 64 vertices
  // injectively, so no candidate up to max_sk certifies.
  DeltaOptions opts;
  opts.max_sk = 40;
  opts.max_candidates = 4;
  try {
    build_delta(Graph::complete(64), 1, opts);
    FAIL() << "expected ResourceError";
  } catch (const ResourceError& e) {
    EXPECT_EQ(e.required(), 32.0);
  }
}

TEST(DeltaLevel, InterleavedTargets) {
  std::vector<Graph> targets{Graph::path(5), Graph::complete(3)};
  DeltaOptions opts;
  opts.max_sk = 600;
  const DeltaGraph d = build_delta_interleaved(targets, 3, opts);
  ASSERT_EQ(d.levels.size(), 3u);
  EXPECT_EQ(d.levels[0].target, 0u);
  EXPECT_EQ(d.levels[1].target, 1u);
  EXPECT_EQ(d.levels[2].target, 0u);
  for (std::size_t m = 0; m < 3; ++m) {
    EXPECT_FALSE(d.levels[m].root_image.has_value());
    EXPECT_FALSE(replay_certificate(d, m, targets[d.levels[m].target]).found);
  }
  EXPECT_TRUE(delta_invariant_violations(d).empty());
  EXPECT_THROW(build_delta_interleaved({Graph::path(8)}, 2, opts), PreconditionError);
}

TEST(SphereTube, Examples) {
  const MetricGraph one = sphere_tube_graph(Graph::path(1));
  EXPECT_EQ(one.nodes, 1u);
  EXPECT_TRUE(one.edges.empty());
  const MetricGraph two = sphere_tube_graph(Graph::path(2));
  EXPECT_EQ(two.nodes, 3u);
  double sum = 0.0;
  for (const auto& e : two.edges) sum += std::get<2>(e);
  EXPECT_NEAR(two.distances_from(0)[1], std::numbers::pi / 2 + 1.0 + std::numbers::pi / 2, 1e-12);
  EXPECT_NEAR(sum, std::numbers::pi + 1.0, 1e-12);
  EXPECT_THROW(sphere_tube_graph(graph_from(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}})), PreconditionError);
}

TEST(SphereTube, QuasiIsometricToDelta) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Graph delta = random_connected(rng, 3 + rng.below(20), rng.below(6), 3);
    const MetricGraph m = sphere_tube_graph(delta);
    for (Vertex a = 0; a < delta.size(); ++a) {
      const auto hop = bfs_distances(delta, a);
      const auto dm = m.distances_from(a);
      for (Vertex b = 0; b < delta.size(); ++b) {
        if (a == b) continue;
        const double ratio = dm[b] / hop[b];
        EXPECT_GE(ratio, 1.0);
        EXPECT_LE(ratio, std::numbers::pi + 1.0 + 1e-12);
      }
    }
  }
}

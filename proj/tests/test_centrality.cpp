#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "oracles/graph_oracles.hpp"
#include "test_util.hpp"
#include "tradenet/centrality.hpp"

using namespace tradenet;
using testutil::directed_graph;
using testutil::undirected_graph;

TEST_CASE("degrees") {
  const auto cycle = directed_graph(3, {{0, 1}, {1, 2}, {2, 0}});
  CHECK(degree(cycle, Direction::in) == std::vector<int>{1, 1, 1});
  CHECK(degree(cycle, Direction::out) == std::vector<int>{1, 1, 1});

  const auto star = directed_graph(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
  CHECK(degree(star, Direction::out) == std::vector<int>{4, 0, 0, 0, 0});
  CHECK(degree(star, Direction::in) == std::vector<int>{0, 1, 1, 1, 1});

  CHECK(degree(directed_graph(4, {}), Direction::in) == std::vector<int>{0, 0, 0, 0});
}

TEST_CASE("strengths") {
  const auto g = YearlyTradeGraph::from_edges(2000, testutil::codes(3), {{0, 1, 5.0}, {0, 2, 7.0}});
  CHECK(strength(g, Direction::out)[0] == 12.0);
  CHECK(strength(g, Direction::in)[1] == 5.0);

  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto r = testutil::random_digraph(rng, 10, 0.4);
    const auto in = strength(r, Direction::in);
    const auto out = strength(r, Direction::out);
    double total = 0.0;
    for (std::size_t i = 0; i < 10; ++i) {
      double row = 0.0;
      double col = 0.0;
      for (std::size_t j = 0; j < 10; ++j) {
        row += r.weight(i, j);
        col += r.weight(j, i);
        total += r.weight(i, j);
      }
      CHECK(out[i] == row);
      CHECK(in[i] == col);
    }
    CHECK(std::accumulate(in.begin(), in.end(), 0.0) == total);
    CHECK(std::accumulate(out.begin(), out.end(), 0.0) == total);
  }
}

TEST_CASE("pagerank closed-form cases") {
  SUBCASE("mutual pair") {
    const auto pr = pagerank(directed_graph(2, {{0, 1}, {1, 0}}));
    CHECK(pr[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(pr[1] == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("3-cycle") {
    for (double v : pagerank(directed_graph(3, {{0, 1}, {1, 2}, {2, 0}}))) {
      CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    }
  }
  SUBCASE("dangling target") {
    // PR_A = 0.075 + 0.425 PR_B with PR_A + PR_B = 1  =>  PR_A = 0.5 / 1.425
    const auto pr = pagerank(directed_graph(2, {{0, 1}}));
    CHECK(pr[0] == doctest::Approx(0.5 / 1.425).epsilon(1e-10));
    CHECK(pr[1] == doctest::Approx(1.0 - 0.5 / 1.425).epsilon(1e-10));
    CHECK(pr[0] == doctest::Approx(0.35088).epsilon(1e-5));
  }
  SUBCASE("isolated node next to a 3-cycle") {
    // PR_D = 0.15/4 + 0.85 PR_D / 4  =>  PR_D = 1/21; cycle nodes share the rest.
    const auto pr = pagerank(directed_graph(4, {{0, 1}, {1, 2}, {2, 0}}));
    CHECK(pr[3] == doctest::Approx(1.0 / 21.0).epsilon(1e-10));
    CHECK(pr[0] == doctest::Approx(20.0 / 63.0).epsilon(1e-10));
  }
}

TEST_CASE("pagerank errors") {
  const auto g = directed_graph(3, {{0, 1}, {1, 2}});
  CHECK_THROWS_AS(pagerank(g, {1.0}), ValidationError);
  CHECK_THROWS_AS(pagerank(g, {0.0}), ValidationError);
  PageRankOptions few;
  few.max_iterations = 2;
  try {
    pagerank(g, few);
    FAIL("expected non-convergence");
  } catch (const PageRankConvergenceError& e) {
    CHECK(e.residual() > 0.0);
  }
}

TEST_CASE("property: pagerank sums to one, respects the teleport floor and matches the eigenvector") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 2 + trial % 9;
    const auto g = testutil::random_digraph(rng, n, 0.35);
    for (auto mode : {PageRankMode::binary, PageRankMode::weighted}) {
      PageRankOptions opt;
      opt.mode = mode;
      const auto pr = pagerank(g, opt);
      const auto ref = oracle::pagerank_dense_eigen(g, 0.85, mode == PageRankMode::weighted);
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        total += pr[i];
        CHECK(pr[i] >= 0.15 / static_cast<double>(n) - 1e-12);
        CHECK(std::fabs(pr[i] - ref[i]) < 1e-8);
      }
      CHECK(std::fabs(total - 1.0) < 1e-9);
    }
    PageRankOptions w;
    const auto base = pagerank(g, w);
    const auto scaled = pagerank(g.scaled(1000.0), w);
    CHECK(base == scaled);
  }
}

TEST_CASE("clustering coefficient") {
  for (double c : clustering_coefficient(undirected_graph(3, {{0, 1}, {1, 2}, {2, 0}}))) CHECK(c == 1.0);
  for (double c : clustering_coefficient(undirected_graph(4, {{0, 1}, {0, 2}, {0, 3}}))) CHECK(c == 0.0);
  const auto cc = clustering_coefficient(undirected_graph(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}}));
  CHECK(cc[0] == doctest::Approx(1.0 / 3.0));
  CHECK(cc[3] == 0.0);
  // direction does not matter: one-way edges project to undirected ones
  for (double c : clustering_coefficient(directed_graph(3, {{0, 1}, {1, 2}, {2, 0}}))) CHECK(c == 1.0);
}

TEST_CASE("onnela clustering reduces to binary clustering on equal weights") {
  const auto g = undirected_graph(5, {{0, 1}, {0, 2}, {1, 2}, {2, 3}, {3, 4}, {2, 4}});
  const auto a = clustering_coefficient(g);
  const auto b = weighted_clustering_onnela(g);
  for (std::size_t i = 0; i < 5; ++i) CHECK(b[i] == doctest::Approx(a[i]));
}

TEST_CASE("closeness") {
  const auto star = undirected_graph(4, {{0, 1}, {0, 2}, {0, 3}});
  CHECK(closeness(star)[0] == 1.0);
  const auto path = undirected_graph(3, {{0, 1}, {1, 2}});
  CHECK(closeness(path)[0] == doctest::Approx(2.0 / 3.0));
  CHECK(closeness(path)[1] == 1.0);
  // disconnected: edge 0-1 plus isolated 2 => r-1 = 1 reached at distance 1, scaled by 1/2
  const auto split = undirected_graph(3, {{0, 1}});
  CHECK(closeness(split)[0] == doctest::Approx(0.5));
  CHECK(closeness(split)[2] == 0.0);
}

TEST_CASE("betweenness") {
  const auto path = directed_graph(3, {{0, 1}, {1, 2}});
  const auto b = betweenness(path);
  CHECK(b.raw == std::vector<double>{0.0, 1.0, 0.0});
  CHECK(b.normalized[1] == doctest::Approx(0.5));

  std::vector<std::pair<std::size_t, std::size_t>> all;
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j)
      if (i != j) all.emplace_back(i, j);
  for (double v : betweenness(directed_graph(5, all)).raw) CHECK(v == 0.0);
}

TEST_CASE("property: betweenness equals exhaustive path enumeration") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 80; ++trial) {
    const std::size_t n = 2 + trial % 7;
    const auto g = testutil::random_digraph(rng, n, 0.3 + 0.05 * (trial % 5));
    CHECK(betweenness(g).raw == oracle::betweenness_by_enumeration(g));
  }
}

TEST_CASE("property: betweenness of tree leaves is zero") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 3 + trial % 8;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t v = 1; v < n; ++v) edges.emplace_back(std::uniform_int_distribution<std::size_t>(0, v - 1)(rng), v);
    const auto tree = undirected_graph(n, edges);
    const auto b = betweenness(tree).raw;
    const auto rw = random_walk_betweenness(tree);
    const auto cc = clustering_coefficient(tree);
    for (std::size_t v = 0; v < n; ++v) {
      CHECK(cc[v] == 0.0);
      if (tree.undirected_neighbors()[v].size() == 1) {
        CHECK(b[v] == 0.0);
        CHECK(rw[v] == doctest::Approx(0.0));
      }
    }
  }
}

TEST_CASE("random-walk betweenness") {
  const auto k3 = undirected_graph(3, {{0, 1}, {1, 2}, {2, 0}});
  const auto a = random_walk_betweenness(k3);
  CHECK(a[0] == doctest::Approx(a[1]));
  CHECK(a[1] == doctest::Approx(a[2]));

  const auto path = undirected_graph(3, {{0, 1}, {1, 2}});
  const auto p = random_walk_betweenness(path);
  CHECK(p[1] > p[0]);
  CHECK(p[0] == doctest::Approx(p[2]));
  // the middle node carries the one unit of the (A, C) pair: 1 / (3*2/2)
  CHECK(p[1] == doctest::Approx(1.0 / 3.0));

  CHECK(random_walk_betweenness(undirected_graph(2, {{0, 1}})) == std::vector<double>{0.0, 0.0});
}

TEST_CASE("property: random-walk betweenness matches the absorbing-chain oracle") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 80; ++trial) {
    const std::size_t n = 3 + trial % 6;
    const auto g = testutil::random_digraph(rng, n, 0.3);
    const auto got = random_walk_betweenness(g);
    const auto want = oracle::rwb_absorbing_chain(g);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::fabs(got[i] - want[i]) < 1e-8);
  }
}

TEST_CASE("property: cut vertex carries at least the separated pair count") {
  // Two cliques of sizes p and q joined through a cut vertex c.
  for (std::size_t p = 1; p <= 3; ++p) {
    for (std::size_t q = 1; q <= 3; ++q) {
      const std::size_t n = p + q + 1;
      const std::size_t c = n - 1;
      std::vector<std::pair<std::size_t, std::size_t>> e;
      for (std::size_t a = 0; a < p; ++a) {
        e.emplace_back(a, c);
        for (std::size_t b = a + 1; b < p; ++b) e.emplace_back(a, b);
      }
      for (std::size_t a = p; a < p + q; ++a) {
        e.emplace_back(a, c);
        for (std::size_t b = a + 1; b < p + q; ++b) e.emplace_back(a, b);
      }
      const auto rw = random_walk_betweenness(undirected_graph(n, e));
      const double pairs = static_cast<double>(n * (n - 1)) / 2.0;
      CHECK(rw[c] >= static_cast<double>(p * q) / pairs - 1e-12);
    }
  }
}

TEST_CASE("k-core decomposition") {
  SUBCASE("sample network with a four-node 3-core") {
    const auto shells = kcore_decomposition(fixtures::kcore_sample_network());
    CHECK(shells == fixtures::kcore_sample_shells);
    CHECK(fixtures::kcore_sample_network().edge_count() == 24);  // 12 undirected edges, both directions
  }
  SUBCASE("triangle") { CHECK(kcore_decomposition(undirected_graph(3, {{0, 1}, {1, 2}, {2, 0}})) == std::vector<int>{2, 2, 2}); }
  SUBCASE("star") { CHECK(kcore_decomposition(undirected_graph(4, {{0, 1}, {0, 2}, {0, 3}})) == std::vector<int>{1, 1, 1, 1}); }
}

TEST_CASE("property: k-core shells are cores and bounded by degree") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial) % 30;
    const auto g = testutil::random_digraph(rng, n, 0.15);
    const auto shells = kcore_decomposition(g);
    CHECK(oracle::kcore_violations(g, shells) == 0);
    CHECK(oracle::kcore_matches_repeated_deletion(g, shells));
    for (std::size_t v = 0; v < n; ++v) CHECK(shells[v] <= static_cast<int>(g.undirected_neighbors()[v].size()));
  }
}

TEST_CASE("property: measures commute with node relabeling") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 7;
    const auto g = testutil::random_digraph(rng, n, 0.35);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::tuple<std::size_t, std::size_t, double>> e;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (g.has_edge(i, j)) e.emplace_back(perm[i], perm[j], g.weight(i, j));
    const auto h = YearlyTradeGraph::from_edges(2010, testutil::codes(n), e);
    const auto a = compute_all(g);
    const auto b = compute_all(h);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& x = a[i];
      const auto& y = b[perm[i]];
      CHECK(x.k_in == y.k_in);
      CHECK(x.s_out == y.s_out);
      CHECK(x.pagerank == doctest::Approx(y.pagerank).epsilon(1e-9));
      CHECK(x.betweenness == doctest::Approx(y.betweenness));
      CHECK(x.rwb == doctest::Approx(y.rwb));
      CHECK(x.closeness == doctest::Approx(y.closeness));
      CHECK(x.clustering == doctest::Approx(y.clustering));
      CHECK(x.kcore == y.kcore);
    }
  }
}

TEST_CASE("compute_all composes the measures deterministically") {
  const auto cycle = directed_graph(3, {{0, 1}, {1, 2}, {2, 0}});
  const auto recs = compute_all(cycle);
  REQUIRE(recs.size() == 3);
  for (const auto& r : recs) {
    CHECK(r.k_in == 1);
    CHECK(r.k_out == 1);
    CHECK(r.pagerank == doctest::Approx(1.0 / 3.0));
    CHECK(r.clustering == 1.0);
    CHECK(r.kcore == 2);
    CHECK(r.closeness == 1.0);
  }
  CHECK(recs[0].country < recs[1].country);

  const auto with_isolated = compute_all(directed_graph(4, {{0, 1}, {1, 2}, {2, 0}}));
  const auto& iso = with_isolated[3];
  CHECK(iso.k_in == 0);
  CHECK(iso.s_out == 0.0);
  CHECK(iso.betweenness == 0.0);
  CHECK(iso.rwb == 0.0);
  CHECK(iso.closeness == 0.0);
  CHECK(iso.clustering == 0.0);
  CHECK(iso.kcore == 0);
  CHECK(iso.pagerank == doctest::Approx(1.0 / 21.0));

  std::mt19937_64 rng(9);
  const auto g = testutil::random_digraph(rng, 12, 0.3);
  const auto first = centrality_csv(compute_all(g));
  CHECK(first == centrality_csv(compute_all(g)));
  CHECK(first.rfind("country,year,k_in,k_out,s_in,s_out,pagerank,betweenness,betweenness_norm,rwb,closeness,clustering,kcore\n", 0) == 0);
}

#include <gtest/gtest.h>

#include "chvd/chordal.hpp"
#include "support/oracles.hpp"

using namespace chvd;

namespace {

Graph star(int leaves) {
  Graph g(leaves + 1);
  for (int i = 1; i <= leaves; ++i) g.add_edge(0, i);
  return g;
}

CliqueTree tree_of(const Graph& g) { return build_clique_tree(g); }

}  // namespace

TEST(Recognize, C4GivesHole) {
  auto r = recognize(oracle::cycle(4));
  ASSERT_TRUE(std::holds_alternative<Hole>(r));
  EXPECT_EQ(std::get<Hole>(r).length(), 4);
  EXPECT_TRUE(verify_hole(oracle::cycle(4), std::get<Hole>(r)));
}

TEST(Recognize, TreesAndCliquesArePerfectlyOrderable) {
  for (const Graph& g : {star(5), oracle::path(6), oracle::complete(5), Graph(0), Graph(3)}) {
    auto r = recognize(g);
    ASSERT_TRUE(std::holds_alternative<Peo>(r));
    EXPECT_TRUE(is_peo(g, std::get<Peo>(r)));
  }
}

TEST(Recognize, RandomChordalAndPerturbed) {
  Rng rng(2024);
  int holes = 0;
  for (int round = 0; round < 200; ++round) {
    const int n = rng.range(4, 14);
    Graph g = oracle::random_chordal(rng, n, rng.range(4, 10), 2);
    auto r = recognize(g);
    ASSERT_TRUE(std::holds_alternative<Peo>(r));
    EXPECT_TRUE(is_peo(g, std::get<Peo>(r)));
    // a far pair first, so that the new edge closes a hole more often than not
    Vertex u = static_cast<Vertex>(rng.below(n)), v = static_cast<Vertex>(rng.below(n));
    for (int tries = 0; tries < 20; ++tries) {
      auto p = bfs_path(g, u, v, full_mask(n));
      if (p && p->size() >= 4) break;
      v = static_cast<Vertex>(rng.below(n));
    }
    if (u == v || g.adjacent(u, v)) continue;
    g.add_edge(u, v);
    auto r2 = recognize(g);
    bool brute = oracle::chordal(g);
    EXPECT_EQ(std::holds_alternative<Peo>(r2), brute);
    if (!brute) {
      ++holes;
      EXPECT_TRUE(verify_hole(g, std::get<Hole>(r2)));
    }
  }
  EXPECT_GT(holes, 20);
}

TEST(Recognize, RandomGraphsMatchEnumeration) {
  Rng rng(5);
  for (int round = 0; round < 150; ++round) {
    Graph g = oracle::random_graph(rng, rng.range(3, 11), 1, 3);
    EXPECT_EQ(is_chordal(g), oracle::chordal(g));
    if (auto h = shortest_hole(g)) {
      EXPECT_TRUE(verify_hole(g, *h));
      int shortest = 99;
      for (auto s : oracle::holes(g)) shortest = std::min(shortest, __builtin_popcount(s));
      EXPECT_EQ(h->length(), shortest);
    }
  }
}

TEST(CliqueTree, P4HasThreeBagsInAPath) {
  CliqueTree t = tree_of(oracle::path(4));
  t.validate(oracle::path(4));
  ASSERT_EQ(t.num_nodes(), 3);
  std::vector<VertexList> bags;
  for (int p = 0; p < 3; ++p) bags.push_back(t.bag(p));
  std::sort(bags.begin(), bags.end());
  EXPECT_EQ(bags, (std::vector<VertexList>{{0, 1}, {1, 2}, {2, 3}}));
  auto mid = t.node_with_bag({1, 2});
  ASSERT_TRUE(mid);
  EXPECT_EQ(t.tree_neighbors(*mid).size(), 2u);
}

TEST(CliqueTree, K5HasOneBag) {
  CliqueTree t = tree_of(oracle::complete(5));
  ASSERT_EQ(t.num_nodes(), 1);
  EXPECT_EQ(t.bag(0), (VertexList{0, 1, 2, 3, 4}));
  for (Vertex v = 0; v < 5; ++v) EXPECT_EQ(t.top(v), t.root());
}

TEST(CliqueTree, TopAfterRerootOnP4) {
  CliqueTree t = tree_of(oracle::path(4));
  t.reroot(*t.node_with_bag({0, 1}));
  EXPECT_EQ(t.bag(t.top(2)), (VertexList{1, 2}));
  EXPECT_EQ(t.bag(t.top(3)), (VertexList{2, 3}));
  EXPECT_EQ(t.bag(t.top(1)), (VertexList{0, 1}));
}

TEST(CliqueTree, RandomInvariants) {
  Rng rng(99);
  for (int round = 0; round < 150; ++round) {
    const int n = rng.range(1, 14);
    Graph g = oracle::random_chordal(rng, n, rng.range(1, 7), 3);
    CliqueTree t = tree_of(g);
    t.validate(g);
    auto bags = oracle::maximal_cliques(g);
    std::vector<VertexList> got;
    for (int p = 0; p < t.num_nodes(); ++p) got.push_back(t.bag(p));
    std::sort(got.begin(), got.end());
    EXPECT_EQ(got, bags);
    t.reroot(static_cast<int>(rng.below(t.num_nodes())));
    t.validate(g);
  }
}

TEST(CliqueTree, LcaMatchesNaiveRootPaths) {
  Rng rng(3);
  for (int round = 0; round < 100; ++round) {
    Graph g = oracle::random_chordal(rng, 12, 8, 2);
    CliqueTree t = tree_of(g);
    t.reroot(static_cast<int>(rng.below(t.num_nodes())));
    for (int p = 0; p < t.num_nodes(); ++p)
      for (int q = 0; q < t.num_nodes(); ++q) {
        std::set<int> up;
        for (int x = p; x >= 0; x = t.parent(x)) up.insert(x);
        int naive = q;
        while (!up.count(naive)) naive = t.parent(naive);
        EXPECT_EQ(t.lca(p, q), naive);
      }
  }
}

TEST(MinimalPath, P4EndsUseEveryBag) {
  CliqueTree t = tree_of(oracle::path(4));
  EXPECT_EQ(t.minimal_path(0, 3).size(), 3u);
  EXPECT_EQ(t.subtree_distance(0, 3), 2);
  EXPECT_TRUE(t.minimal_path(1, 2).empty());
  EXPECT_EQ(t.subtree_distance(1, 2), 0);
}

TEST(MinimalPath, EveryAdhesionSeparates) {
  Rng rng(17);
  int checked = 0;
  for (int round = 0; round < 100; ++round) {
    Graph g = oracle::random_chordal(rng, 12, 8, 3);
    CliqueTree t = tree_of(g);
    for (Vertex s = 0; s < g.size(); ++s)
      for (Vertex u = s + 1; u < g.size(); ++u) {
        auto path = t.minimal_path(s, u);
        for (std::size_t i = 0; i + 1 < path.size(); ++i) {
          Mask allowed = full_mask(g.size());
          for (Vertex w : t.adhesion(path[i], path[i + 1])) allowed[w] = 0;
          allowed[s] = allowed[u] = 1;
          if (contains_sorted(t.adhesion(path[i], path[i + 1]), s) ||
              contains_sorted(t.adhesion(path[i], path[i + 1]), u))
            continue;
          EXPECT_FALSE(bfs_path(g, s, u, allowed));
          ++checked;
        }
      }
  }
  EXPECT_GT(checked, 100);
}

TEST(InducedPathAvoiding, P4) {
  Graph p = oracle::path(4);
  CliqueTree t = tree_of(p);
  auto full = induced_path_avoiding(p, t, 0, 3, Mask(4, 0));
  ASSERT_TRUE(full);
  EXPECT_EQ(*full, (VertexList{0, 1, 2, 3}));
  Mask forbid(4, 0);
  forbid[1] = 1;
  EXPECT_FALSE(induced_path_avoiding(p, t, 0, 3, forbid));
}

TEST(InducedPathAvoiding, AgreesWithBfs) {
  Rng rng(23);
  for (int round = 0; round < 100; ++round) {
    Graph g = oracle::random_chordal(rng, 12, 6, 3);
    CliqueTree t = tree_of(g);
    Mask forbid(g.size(), 0);
    for (Vertex v = 0; v < g.size(); ++v) forbid[v] = rng.chance(1, 4);
    for (Vertex s = 0; s < g.size(); ++s)
      for (Vertex u = 0; u < g.size(); ++u) {
        auto p = induced_path_avoiding(g, t, s, u, forbid);
        Mask allowed(g.size());
        for (Vertex v = 0; v < g.size(); ++v) allowed[v] = !forbid[v];
        bool reachable = !forbid[s] && !forbid[u] && bfs_path(g, s, u, allowed).has_value();
        EXPECT_EQ(p.has_value(), reachable);
        if (p) {
          EXPECT_TRUE(is_induced_path(g, *p));
          for (Vertex v : *p) EXPECT_FALSE(forbid[v]);
        }
      }
  }
}

TEST(Mis, SmallCases) {
  EXPECT_EQ(mis_chordal(oracle::complete(4)).size(), 1u);
  EXPECT_EQ(mis_chordal(Graph(5)).size(), 5u);
  EXPECT_THROW(mis_chordal(oracle::cycle(4)), std::invalid_argument);
}

TEST(Mis, MatchesBruteForce) {
  Rng rng(31);
  for (int round = 0; round < 150; ++round) {
    const int n = rng.range(1, 14);
    Graph g = oracle::random_chordal(rng, n, rng.range(1, 8), 3);
    VertexList s = mis_chordal(g);
    EXPECT_TRUE(oracle::independent(g, oracle::to_set(s)));
    EXPECT_EQ(static_cast<int>(s.size()), oracle::max_independent(g, oracle::full(n)));
  }
}

TEST(CentralBag, PathAndClique) {
  VertexList mid = central_bag(oracle::path(5), std::vector<double>(5, 1.0));
  EXPECT_TRUE(contains_sorted(mid, 2));
  EXPECT_EQ(central_bag(oracle::complete(4), std::vector<double>(4, 1.0)), (VertexList{0, 1, 2, 3}));
}

TEST(CentralBag, ComponentsWeighAtMostHalf) {
  Rng rng(37);
  for (int round = 0; round < 150; ++round) {
    const int n = rng.range(2, 16);
    Graph g = oracle::random_chordal(rng, n, rng.range(2, 9), 3);
    std::vector<double> w(n);
    double total = 0;
    for (double& x : w) total += (x = static_cast<double>(rng.below(100)) / 37.0);
    VertexList bag = central_bag(g, w);
    EXPECT_TRUE(is_clique(g, bag));
    Mask rest = full_mask(n);
    for (Vertex v : bag) rest[v] = 0;
    for (const auto& comp : connected_components(g, &rest)) {
      double cw = 0;
      for (Vertex v : comp) cw += w[v];
      EXPECT_LE(cw, total / 2 + 1e-9);
    }
  }
}

TEST(HoleThrough, C5AndSimplicial) {
  auto h = find_hole_through(oracle::cycle(5), 2);
  ASSERT_TRUE(h);
  EXPECT_EQ(h->length(), 5);
  EXPECT_TRUE(contains_sorted(h->vertex_set(), 2));
  Graph p = oracle::path(4);
  EXPECT_FALSE(find_hole_through(p, 0));
}

TEST(HoleThrough, MatchesEnumeration) {
  Rng rng(41);
  int found = 0;
  for (int round = 0; round < 150; ++round) {
    const int n = rng.range(4, 12);
    Graph g = oracle::random_chordal(rng, n, rng.range(2, 7), 2);
    for (int extra = rng.range(1, 3); extra > 0; --extra) {
      Vertex a = static_cast<Vertex>(rng.below(n)), b = static_cast<Vertex>(rng.below(n));
      if (a != b) g.add_edge(a, b);
    }
    auto hs = oracle::holes(g);
    for (Vertex v = 0; v < n; ++v) {
      bool brute = false;
      for (auto s : hs) brute = brute || (s >> v & 1);
      auto h = find_hole_through(g, v);
      EXPECT_EQ(h.has_value(), brute);
      if (h) {
        ++found;
        EXPECT_TRUE(verify_hole(g, *h));
        EXPECT_TRUE(contains_sorted(h->vertex_set(), v));
      }
    }
  }
  EXPECT_GT(found, 50);
}

TEST(MaximalCliques, SmallCases) {
  EXPECT_EQ(maximal_cliques(oracle::complete(4)).size(), 1u);
  EXPECT_EQ(maximal_cliques(oracle::cycle(5)).size(), 5u);
  EXPECT_EQ(clique_number(oracle::complete(4)), 4);
}

TEST(MaximalCliques, C4FreeGraphsMatchEnumeration) {
  Rng rng(43);
  int checked = 0;
  for (int round = 0; round < 400 && checked < 120; ++round) {
    const int n = rng.range(2, 12);
    Graph g = rng.chance(1, 2) ? oracle::random_chordal(rng, n, 5, 3) : oracle::random_graph(rng, n, 1, 4);
    bool c4 = false;
    for (auto s : oracle::holes(g)) c4 = c4 || __builtin_popcount(s) == 4;
    if (c4) continue;
    auto got = maximal_cliques(g);
    EXPECT_EQ(got, oracle::maximal_cliques(g));
    EXPECT_LE(static_cast<int>(got.size()), n * n);
    ++checked;
  }
  EXPECT_EQ(checked, 120);
}

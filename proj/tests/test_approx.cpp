#include <gtest/gtest.h>

#include "chvd/generate.hpp"
#include "chvd/approx.hpp"
#include "support/oracles.hpp"

using namespace chvd;

namespace {

bool chordal_after(const Graph& g, const VertexList& keep_from, const VertexList& removed) {
  Mask m = mask_of(g.size(), keep_from);
  for (Vertex v : removed) m[v] = 0;
  return oracle::chordal(g, oracle::to_set(members(m)));
}

Graph disjoint_c4s(int t) {
  Graph g(4 * t);
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < 4; ++j) g.add_edge(4 * i + j, 4 * i + (j + 1) % 4);
  return g;
}

// Chordal part on the first vertices, then a clique B with random edges into it.
struct CliquePlusChordal {
  Graph g;
  VertexList a, b;
};

CliquePlusChordal clique_plus_chordal(Rng& rng, int na, int nb) {
  Graph body = oracle::random_chordal(rng, na, rng.range(3, 8), 2);
  CliquePlusChordal c{Graph(na + nb), {}, {}};
  for (auto [u, v] : body.edges()) c.g.add_edge(u, v);
  for (int i = 0; i < na; ++i) c.a.push_back(i);
  for (int i = na; i < na + nb; ++i) {
    c.b.push_back(i);
    for (int j = na; j < i; ++j) c.g.add_edge(i, j);
    for (int u = 0; u < na; ++u)
      if (rng.chance(1, 4)) c.g.add_edge(i, u);
  }
  return c;
}

}  // namespace

TEST(HitHolesThrough, ChordalUnionNeedsNothing) {
  Graph g = oracle::path(5);
  FractionalSolution x{std::vector<double>(5, 0.0)};
  EXPECT_TRUE(hit_holes_through(g, {0, 1, 2, 3}, {4}, {1, 2}, x).empty());
}

TEST(HitHolesThrough, LongHoleThroughTheRoot) {
  Graph g = oracle::cycle(21);
  VertexList a;
  for (int i = 1; i < 21; ++i) a.push_back(i);
  FractionalSolution x{std::vector<double>(21, 0.05)};
  x.x[0] = 0.0;
  VertexList cut = hit_holes_through(g, a, {0}, {10, 11}, x);
  EXPECT_FALSE(cut.empty());
  EXPECT_TRUE(chordal_after(g, set_union(a, {0}), cut));
}

TEST(HitHolesThrough, RejectsBrokenPreconditions) {
  Graph g = oracle::cycle(5);
  FractionalSolution x{std::vector<double>(5, 0.0)};
  EXPECT_THROW(hit_holes_through(g, {0, 1, 2, 3, 4}, {}, {0, 1}, x), std::invalid_argument);
  x.x[1] = 0.2;
  EXPECT_THROW(hit_holes_through(g, {1, 2, 3, 4}, {0}, {1, 2}, x), std::invalid_argument);
  x.x[1] = 0.0;
  x.x[0] = 0.01;
  EXPECT_THROW(hit_holes_through(g, {1, 2, 3, 4}, {0}, {1, 2}, x), std::invalid_argument);
}

// Long interval graphs plus one or two apex vertices: holes are long, so weights below 1/10 can be feasible.
TEST(HitHolesThrough, RandomInstancesLeaveNoHoleThroughL) {
  Rng rng(107);
  int cut_something = 0, checked = 0;
  for (int round = 0; round < 200 && checked < 60; ++round) {
    const int na = rng.range(24, 40), nb = rng.range(1, 2);
    Graph g(na + nb);
    std::vector<int> lo(na), hi(na);
    for (int v = 0, pos = 0; v < na; ++v) {
      pos += rng.range(1, 2);
      lo[v] = pos;
      hi[v] = pos + rng.range(1, 3);
    }
    for (int u = 0; u < na; ++u)
      for (int v = u + 1; v < na; ++v)
        if (lo[v] <= hi[u] && lo[u] <= hi[v]) g.add_edge(u, v);
    VertexList a, b;
    for (int i = 0; i < na; ++i) a.push_back(i);
    for (int i = na; i < na + nb; ++i) {
      b.push_back(i);
      for (int j = na; j < i; ++j) g.add_edge(i, j);
      for (int t = rng.range(2, 3); t > 0; --t) g.add_edge(i, static_cast<int>(rng.below(na)));
    }
    FractionalSolution x{std::vector<double>(g.size(), 0.0)};
    for (Vertex v : a) x.x[v] = 0.05 + static_cast<double>(rng.below(45)) / 1000.0;
    if (separate_chvd(g, x)) continue;
    ++checked;
    Mask in_a = mask_of(g.size(), a);
    auto cliques = maximal_cliques(g, &in_a);
    const VertexList& l = rng.pick(cliques);
    VertexList cut = hit_holes_through(g, a, b, l, x);
    cut_something += !cut.empty();
    Mask rest = full_mask(g.size());
    for (Vertex v : cut) rest[v] = 0;
    for (Vertex v : l)
      if (rest[v]) EXPECT_FALSE(find_hole_through(g, v, &rest));
  }
  EXPECT_EQ(checked, 60);
  EXPECT_GT(cut_something, 5);
}

TEST(CliquePlusChordal, ChordalGraphKeepsOnlyHeavyVertices) {
  Graph g = oracle::path(6);
  FractionalSolution x{{0.0, 0.3, 0.0, 0.01, 0.0, 0.0}};
  EXPECT_EQ(chvd_clique_plus_chordal(g, {0, 1, 2, 3, 4}, {5}, x), (VertexList{1}));
  EXPECT_TRUE(chvd_clique_plus_chordal(g, {0, 1, 2, 3, 4}, {5}, FractionalSolution{std::vector<double>(6, 0.0)}).empty());
}

TEST(CliquePlusChordal, SingleVertexCliqueClosesOneHole) {
  Graph g = oracle::cycle(5);
  LpResult lp = solve_fractional(g);
  VertexList sol = chvd_clique_plus_chordal(g, {1, 2, 3, 4}, {0}, lp.solution);
  EXPECT_FALSE(sol.empty());
  EXPECT_TRUE(chordal_after(g, {0, 1, 2, 3, 4}, sol));
}

TEST(CliquePlusChordal, RandomInstancesBecomeChordal) {
  Rng rng(109);
  for (int round = 0; round < 120; ++round) {
    auto c = clique_plus_chordal(rng, rng.range(4, 13), rng.range(1, 3));
    LpResult lp = solve_fractional(c.g);
    VertexList sol = chvd_clique_plus_chordal(c.g, c.a, c.b, lp.solution);
    EXPECT_TRUE(chordal_after(c.g, set_union(c.a, c.b), sol));
  }
}

TEST(BalancedCliqueCut, CompleteGraph) {
  auto cut = balanced_clique_cut(oracle::complete(6), 0);
  ASSERT_TRUE(cut);
  EXPECT_EQ(cut->z, (VertexList{0, 1, 2, 3, 4, 5}));
  EXPECT_EQ(cut->k, cut->z);
}

TEST(BalancedCliqueCut, TwoCliquesThroughOneVertex) {
  Graph g(9);
  for (int u = 0; u < 4; ++u)
    for (int v = u + 1; v < 4; ++v) {
      g.add_edge(u, v);
      g.add_edge(u + 4, v + 4);
    }
  for (int u = 0; u < 8; ++u) g.add_edge(8, u);
  auto cut = balanced_clique_cut(g, 1);
  ASSERT_TRUE(cut);
  EXPECT_TRUE(cut->z == (VertexList{0, 1, 2, 3, 8}) || cut->z == (VertexList{4, 5, 6, 7, 8}));
}

TEST(BalancedCliqueCut, RandomC4FreeYesInstances) {
  Rng rng(113);
  int checked = 0;
  for (int round = 0; round < 400 && checked < 80; ++round) {
    GeneratorSpec spec;
    spec.seed = rng.next();
    spec.core = rng.range(6, 12);
    spec.tree_nodes = rng.range(4, 9);
    spec.subtree_max = 2;
    spec.planted = rng.range(1, 2);
    spec.noise = rng.range(0, 2);
    Generated gen = generate(spec);
    const Graph& g = gen.g;
    if (g.size() > 14) continue;
    bool c4 = false;
    for (auto h : oracle::holes(g)) c4 = c4 || __builtin_popcount(h) == 4;
    if (c4) continue;
    const int opt = oracle::min_deletion(g);
    auto cut = balanced_clique_cut(g, opt);
    ASSERT_TRUE(cut);
    EXPECT_TRUE(is_clique(g, cut->k));
    EXPECT_TRUE(is_subset(cut->k, cut->z));
    EXPECT_LE(static_cast<int>(set_difference(cut->z, cut->k).size()), opt);
    Mask rest = full_mask(g.size());
    for (Vertex v : cut->z) rest[v] = 0;
    for (const auto& comp : connected_components(g, &rest)) EXPECT_LE(4 * comp.size(), 3u * g.size());
    ++checked;
  }
  EXPECT_EQ(checked, 80);
}

TEST(Decompose, ChordalGraphIsItsOwnRemainder) {
  auto d = decompose(oracle::path(5), 1);
  ASSERT_TRUE(d);
  EXPECT_EQ(d->a0, (VertexList{0, 1, 2, 3, 4}));
  EXPECT_TRUE(d->cliques.empty());
  EXPECT_TRUE(d->x0.empty());
}

TEST(Decompose, C4) {
  auto d = decompose(oracle::cycle(4), 1);
  ASSERT_TRUE(d);
  EXPECT_LE(d->cliques.size(), 1u);
  VertexList all = d->a0;
  for (const auto& k : d->cliques) all = set_union(all, k);
  all = set_union(all, d->x0);
  EXPECT_EQ(all, (VertexList{0, 1, 2, 3}));
  Mask a0 = mask_of(4, d->a0);
  EXPECT_TRUE(is_chordal(oracle::cycle(4), &a0));
}

TEST(Decompose, ZeroBudgetOnAHoleIsNo) { EXPECT_FALSE(decompose(oracle::cycle(5), 0)); }

TEST(Decompose, RandomPartitions) {
  Rng rng(127);
  for (int round = 0; round < 80; ++round) {
    GeneratorSpec spec;
    spec.seed = rng.next();
    spec.core = rng.range(6, 14);
    spec.planted = rng.range(1, 3);
    Generated gen = generate(spec);
    auto d = decompose(gen.g, gen.k);
    if (!d) continue;
    std::vector<int> seen(gen.g.size(), 0);
    for (Vertex v : d->a0) ++seen[v];
    for (Vertex v : d->x0) ++seen[v];
    for (const auto& k : d->cliques) {
      EXPECT_TRUE(is_clique(gen.g, k));
      for (Vertex v : k) ++seen[v];
    }
    for (int c : seen) EXPECT_EQ(c, 1);
    Mask a0 = mask_of(gen.g.size(), d->a0);
    EXPECT_TRUE(is_chordal(gen.g, &a0));
    EXPECT_LE(d->steps, decomposition_step_cap(gen.g.size(), gen.k));
  }
}

TEST(Approximate, ChordalGraph) {
  ApproxOptions opt;
  opt.exact_guard = false;
  ApproxResult r = approximate(oracle::path(7), 0, opt);
  EXPECT_FALSE(r.no_instance);
  EXPECT_TRUE(r.solution.empty());
}

TEST(Approximate, DisjointC4s) {
  ApproxOptions opt;
  opt.exact_guard = false;
  for (int t = 1; t <= 4; ++t) {
    Graph g = disjoint_c4s(t);
    ApproxResult r = approximate(g, t, opt);
    ASSERT_FALSE(r.no_instance) << r.reason;
    EXPECT_GE(static_cast<int>(r.solution.size()), t);
    EXPECT_TRUE(chordal_after(g, members(full_mask(g.size())), r.solution));
  }
}

TEST(Approximate, FractionalCertificateForNo) {
  ApproxOptions opt;
  opt.exact_guard = false;
  ApproxResult r = approximate(disjoint_c4s(5), 2, opt);
  EXPECT_TRUE(r.no_instance);
  EXPECT_NEAR(r.lp_value, 5.0, 1e-6);
  EXPECT_TRUE(approximate(oracle::cycle(4), -1).no_instance);
}

TEST(Approximate, GuardRoutesToTheOracle) {
  EXPECT_TRUE(oracle_guard(2, 1));
  EXPECT_TRUE(oracle_guard(16, 2));
  EXPECT_FALSE(oracle_guard(16, 3));
  EXPECT_FALSE(oracle_guard(1, 0));
  ApproxResult r = approximate(oracle::cycle(4), 1);
  EXPECT_TRUE(r.used_oracle);
  EXPECT_EQ(r.solution.size(), 1u);
}

TEST(Approximate, YesInstancesNeverRejected) {
  Rng rng(131);
  for (int round = 0; round < 100; ++round) {
    GeneratorSpec spec;
    spec.seed = rng.next();
    spec.core = rng.range(6, 13);
    spec.planted = rng.range(1, 3);
    spec.noise = rng.range(0, 3);
    Generated gen = generate(spec);
    if (gen.g.size() > 16) continue;
    const int opt = oracle::min_deletion(gen.g);
    for (bool guard : {false, true}) {
      ApproxOptions o;
      o.exact_guard = guard;
      ApproxResult r = approximate(gen.g, opt, o);
      ASSERT_FALSE(r.no_instance) << r.reason;
      EXPECT_TRUE(chordal_after(gen.g, members(full_mask(gen.g.size())), r.solution));
      EXPECT_GE(static_cast<int>(r.solution.size()), opt);
    }
  }
}

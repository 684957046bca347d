#include <gtest/gtest.h>

#include "chvd/generate.hpp"
#include "chvd/kernel.hpp"
#include "support/oracles.hpp"

using namespace chvd;

namespace {

struct Sample {
  Graph g;
  int k = 0;
  VertexList m0;
};

// Planted instance with n <= max_n and a modulator that covers the planted vertices.
Sample planted_sample(Rng& rng, int max_n) {
  GeneratorSpec s;
  s.seed = rng.next();
  s.planted = rng.range(1, 3);
  s.core = rng.range(3, max_n - s.planted);
  s.tree_nodes = rng.range(2, s.core);
  s.subtree_max = rng.range(1, 3);
  s.noise = rng.range(0, 4);
  Generated gen = generate(s);
  Sample out{gen.g, rng.range(0, 3), gen.planted};
  for (int i = rng.range(0, 2); i > 0; --i) out.m0.push_back(static_cast<Vertex>(rng.below(gen.g.size())));
  sort_unique(out.m0);
  return out;
}

bool answer(const Graph& g, int k, const std::vector<Edge>& forced = {}) { return oracle::has_solution(g, k, forced); }

bool answer(const AChvdInstance& a) { return answer(a.g, a.k, a.forced); }

// x and y joined by `paths` vertex-disjoint paths x - a - b - y.
AChvdInstance petals(int paths, int k) {
  Graph g(2);
  for (int i = 0; i < paths; ++i) {
    Vertex a = g.add_vertex(), b = g.add_vertex();
    g.add_edge(0, a);
    g.add_edge(a, b);
    g.add_edge(b, 1);
  }
  return AChvdInstance::make(g, k, {0, 1});
}

// Path 0 .. len-1 with two apexes on its ends and a few pendants.
Sample apex_path(Rng& rng, int len) {
  Sample s;
  s.g = oracle::path(len);
  for (int p = rng.range(0, 2); p > 0; --p) s.g.add_edge(s.g.add_vertex(), rng.range(3, len - 4));
  for (int a = 0; a < 2; ++a) {
    Vertex x = s.g.add_vertex();
    s.g.add_edge(x, rng.range(0, 1));
    s.g.add_edge(x, len - 1 - rng.range(0, 1));
    s.m0.push_back(x);
  }
  s.k = 1;
  return s;
}

}  // namespace

TEST(KernelParams, Formulas) {
  KernelParams p = KernelParams::of(0, 1);
  EXPECT_EQ(p.omega, 4);
  EXPECT_EQ(p.rule4_budget, 82);
  EXPECT_EQ(p.component_ceiling, 84);
  for (long long k = 0; k <= 4; ++k)
    for (long long m = 0; m <= 6; ++m) {
      KernelParams q = KernelParams::of(static_cast<int>(k), static_cast<int>(m));
      const long long w = (k + 1) * (m * m * m + (k + 3) * m * m);
      const long long inner = (k + 2) * w + m;
      EXPECT_EQ(q.omega, w);
      EXPECT_EQ(q.rule4_budget, (k + 1) * inner * inner + 1);
      EXPECT_EQ(q.component_ceiling, (k + 1) * inner * inner + (k + 1) * (m + m * m) + 1);
    }
}

TEST(KernelParams, Saturates) {
  KernelParams p = KernelParams::of(1000, 1000);
  EXPECT_EQ(p.rule4_budget, 1LL << 60);
  EXPECT_GT(p.z_ceiling(), 0);
}

TEST(Selector, NoConstraintsIsTheBody) {
  AChvdInstance a = petals(3, 0);
  EXPECT_EQ(detail::selector(a, {}, {}), (VertexList{2, 3, 4, 5, 6, 7}));
  EXPECT_TRUE(detail::selector(a, {0}, {0}).empty());
}

TEST(Selector, MatchesSetAlgebra) {
  Rng rng(107);
  for (int round = 0; round < 100; ++round) {
    Sample s = planted_sample(rng, 14);
    AChvdInstance a = AChvdInstance::make(s.g, s.k, s.m0);
    VertexList pos, neg;
    for (Vertex x : a.modulator) (rng.chance(1, 2) ? pos : neg).push_back(x);
    VertexList want;
    for (Vertex v = 0; v < a.size(); ++v) {
      if (a.in_modulator(v)) continue;
      bool ok = true;
      for (Vertex x : pos) ok = ok && contains_sorted(a.g.neighbors(v), x);
      for (Vertex y : neg) ok = ok && !contains_sorted(a.g.neighbors(v), y);
      if (ok) want.push_back(v);
    }
    EXPECT_EQ(detail::selector(a, pos, neg), want);
  }
}

TEST(Annotate, ChordalWithoutModulatorIsUnchanged) {
  Graph g = oracle::path(6);
  AnnotateResult r = annotate(g, 1, {});
  EXPECT_FALSE(r.no_instance);
  EXPECT_EQ(r.instance.g, g);
  EXPECT_EQ(r.instance.k, 1);
  EXPECT_TRUE(r.instance.modulator.empty());
  EXPECT_TRUE(r.instance.forced.empty());
  EXPECT_TRUE(r.events.empty());
}

TEST(Annotate, FlowerAboveBudgetIsNo) {
  AnnotateResult r = annotate(oracle::cycle(4), 0, {0});
  EXPECT_TRUE(r.no_instance);
  ASSERT_EQ(r.events.size(), 1u);
  EXPECT_EQ(r.events[0].deleted, (std::vector<int>{0}));
  EXPECT_EQ(r.events[0].k_delta, -1);
}

TEST(Annotate, RejectsNonChordalRemainder) {
  EXPECT_THROW(annotate(oracle::cycle(5), 1, {}), std::invalid_argument);
}

TEST(Annotate, RandomInstancesStayEquivalent) {
  Rng rng(109);
  int deleted = 0;
  for (int round = 0; round < 150; ++round) {
    Sample s = planted_sample(rng, 16);
    AnnotateResult r = annotate(s.g, s.k, s.m0);
    const bool truth = answer(s.g, s.k);
    for (const auto& e : r.events) deleted += static_cast<int>(e.deleted.size());
    if (r.no_instance) {
      EXPECT_FALSE(truth);
      continue;
    }
    const AChvdInstance& a = r.instance;
    std::string why;
    EXPECT_TRUE(check_instance(a, &why)) << why;
    EXPECT_TRUE(a.forced.empty());
    EXPECT_EQ(answer(a), truth);
    EXPECT_LE(a.modulator.size(), s.m0.size() * (12 * s.k + 1));
  }
  EXPECT_GT(deleted, 0);
}

TEST(Rule1, TwoIndependentCommonNeighbours) {
  AChvdInstance a = AChvdInstance::make(oracle::cycle(4), 0, {0, 2});
  ASSERT_TRUE(check_instance(a));
  const bool before = answer(a);
  auto e = rule1_common_neighbours(a);
  ASSERT_TRUE(e);
  EXPECT_EQ(e->forced, (std::vector<std::pair<int, int>>{{0, 2}}));
  EXPECT_TRUE(a.is_forced(0, 2));
  EXPECT_TRUE(a.g.adjacent(0, 2));
  EXPECT_TRUE(check_instance(a));
  EXPECT_EQ(answer(a), before);
}

TEST(Rule1, AdjacentPairNeverFires) {
  Graph g = oracle::cycle(4);
  g.add_edge(0, 2);
  AChvdInstance a = AChvdInstance::make(g, 0, {0, 2});
  EXPECT_FALSE(rule1_common_neighbours(a));
  EXPECT_EQ(a.g, g);
}

TEST(Rule1, BelowThresholdNeverFires) {
  AChvdInstance a = AChvdInstance::make(oracle::cycle(4), 1, {0, 2});
  EXPECT_FALSE(rule1_common_neighbours(a));
}

TEST(Rule2, DisjointPetalsForceThePair) {
  AChvdInstance a = petals(3, 0);
  ASSERT_TRUE(check_instance(a));
  // any two petals close a hole
  oracle::Set two = oracle::to_set({0, 1, 2, 3, 4, 5});
  auto hs = oracle::holes(a.g);
  EXPECT_NE(std::find(hs.begin(), hs.end(), two), hs.end());
  EXPECT_FALSE(rule1_common_neighbours(a));
  const bool before = answer(a);
  auto e = rule2_xy_good(a);
  ASSERT_TRUE(e);
  EXPECT_TRUE(a.is_forced(0, 1));
  EXPECT_EQ(answer(a), before);
}

TEST(Rule2, PathsThroughOneBag) {
  // x - c - y and x - d - y with c, d adjacent: one bottom good node
  Graph g(4);
  for (Vertex v : {2, 3}) {
    g.add_edge(0, v);
    g.add_edge(1, v);
  }
  g.add_edge(2, 3);
  AChvdInstance a = AChvdInstance::make(g, 0, {0, 1});
  ASSERT_TRUE(check_instance(a));
  CliqueTree t = detail::body_tree(a);
  EXPECT_EQ(bottom_good_nodes(a, t, 0, 1).size(), 1u);
  EXPECT_FALSE(rule2_xy_good(a, t));
}

TEST(Rule3, EmptyModulatorTrimsAnyClique) {
  AChvdInstance a = AChvdInstance::make(oracle::complete(6), 0, {});
  auto e = rule3_reduce_clique(a);
  ASSERT_TRUE(e);
  EXPECT_EQ(e->deleted.size(), 1u);
  EXPECT_EQ(a.size(), 5);
  EXPECT_TRUE(is_chordal(a.g));
}

TEST(Rule3, LargeCliqueNextToOneModulatorVertex) {
  Rng rng(113);
  for (int round = 0; round < 40; ++round) {
    const int size = rng.range(5, 9);
    Graph g = oracle::complete(size);
    g.add_vertex();
    for (Vertex u = 0; u < size; ++u)
      if (rng.chance(1, 2)) g.add_edge(size, u);
    AChvdInstance a = AChvdInstance::make(g, 0, {size});
    ASSERT_TRUE(check_instance(a));
    const bool before = answer(a);
    auto e = rule3_reduce_clique(a);
    ASSERT_TRUE(e);
    EXPECT_EQ(e->rule, "rule3");
    EXPECT_TRUE(check_instance(a));
    EXPECT_EQ(answer(a), before);
  }
}

TEST(Rule3, RejectsSmallCliques) {
  AChvdInstance a = AChvdInstance::make(oracle::complete(4), 0, {});
  KernelParams p = KernelParams::of(0, 0);
  ASSERT_EQ(p.omega, 0);
  Graph tri = oracle::complete(3);
  tri.add_vertex();
  tri.add_edge(3, 0);
  AChvdInstance b = AChvdInstance::make(tri, 0, {3});
  EXPECT_THROW(rule3_reduce_clique(b, {0, 1, 2}), std::invalid_argument);
  EXPECT_THROW(rule3_reduce_clique(a, {0, 1, 2, 9}), std::exception);
}

TEST(Template, MarkedSingleComponentStays) {
  // x and y see the two ends of one path component
  Graph g = oracle::path(6);
  AChvdInstance a = AChvdInstance::make(g, 0, {0, 5});
  EXPECT_FALSE(template_toughness(a, {0, 5}, "template"));
  EXPECT_EQ(a.g, g);
}

TEST(Template, DeletesSurplusComponents) {
  // k = 0 keeps two of the four petals between x and y
  AChvdInstance a = petals(4, 0);
  const bool before = answer(a);
  auto e = template_toughness(a, {0, 1}, "template");
  ASSERT_TRUE(e);
  EXPECT_EQ(e->deleted.size(), 2u);
  EXPECT_EQ(a.size(), 8);
  EXPECT_EQ(answer(a), before);
}

TEST(Template, RequiresTheModulator) {
  AChvdInstance a = petals(2, 0);
  EXPECT_THROW(template_toughness(a, {0}, "template"), std::invalid_argument);
}

TEST(Rule4, SingleComponentIsAbsent) {
  // x - 0 - 1 - 2 - 3 - 4 - y
  Graph g = oracle::path(7);
  AChvdInstance a = AChvdInstance::make(g, 0, {0, 6});
  ASSERT_TRUE(check_instance(a));
  EXPECT_FALSE(rule4_components(a));
  EXPECT_EQ(a.g, g);
}

TEST(BuildSQ, EmptyModulatorIsTheRootBag) {
  Rng rng(127);
  for (int round = 0; round < 30; ++round) {
    Graph g = oracle::random_chordal(rng, rng.range(1, 14), rng.range(1, 6), 3);
    AChvdInstance a = AChvdInstance::make(g, 0, {});
    SeparatorSet s = build_SQ(a);
    EXPECT_TRUE(s.q0.empty());
    EXPECT_EQ(s.q, (std::vector<int>{s.tree.root()}));
    EXPECT_EQ(s.sq, s.tree.bag(s.tree.root()));
  }
}

TEST(BuildSQ, LcaClosedOnRandomInstances) {
  Rng rng(131);
  int checked = 0;
  for (int round = 0; round < 80; ++round) {
    Sample s = planted_sample(rng, 16);
    AnnotateResult r = annotate(s.g, s.k, s.m0);
    if (r.no_instance) continue;
    SeparatorSet sq = build_SQ(r.instance);
    for (int p : sq.q)
      for (int q : sq.q) EXPECT_TRUE(std::binary_search(sq.q.begin(), sq.q.end(), sq.tree.lca(p, q)));
    for (int p : sq.q)
      for (Vertex v : sq.tree.bag(p)) EXPECT_TRUE(contains_sorted(sq.sq, v));
    ++checked;
  }
  EXPECT_GT(checked, 40);
}

TEST(Rule7, BypassOnApexedPaths) {
  Rng rng(137);
  int bypasses = 0, degree_two = 0;
  for (int round = 0; round < 12; ++round) {
    Sample s = apex_path(rng, rng.range(13, 15));
    KernelOptions opt;
    opt.observer = [&](const AChvdInstance& before, const AChvdInstance& after, const ReductionEvent& e) {
      EXPECT_EQ(answer(before), answer(after)) << e.rule;
      if (e.rule != "rule7") return;
      ++bypasses;
      ASSERT_EQ(e.deleted.size(), 1u);
      const Vertex v = static_cast<Vertex>(std::find(before.labels.begin(), before.labels.end(), e.deleted[0]) -
                                           before.labels.begin());
      EXPECT_EQ(after.size(), before.size() - 1);
      Mask body = after.body();
      EXPECT_TRUE(is_chordal(after.g, &body));
      if (before.g.degree(v) == 2) {
        ++degree_two;
        EXPECT_EQ(after.g.num_edges(), before.g.num_edges() - 1);
      }
    };
    AnnotateResult ann = annotate(s.g, s.k, s.m0);
    ASSERT_FALSE(ann.no_instance);
    AnnotatedKernel red = kernelize_annotated(ann.instance, opt);
    EXPECT_EQ(answer(red.instance), answer(s.g, s.k));
  }
  EXPECT_GT(bypasses, 0);
  EXPECT_GT(degree_two, 0);
}

TEST(KernelizeAnnotated, BudgetCoversModulator) {
  AChvdInstance a = petals(3, 2);
  AnnotatedKernel r = kernelize_annotated(a);
  EXPECT_TRUE(r.trivial_yes);
  EXPECT_EQ(r.instance.size(), 1);
  ASSERT_EQ(r.trace.events.size(), 1u);
  EXPECT_EQ(r.trace.events[0].rule, "trivial_yes");
}

TEST(KernelizeAnnotated, ChordalWithoutModulator) {
  AnnotatedKernel r = kernelize_annotated(AChvdInstance::make(oracle::path(5), 0, {}));
  EXPECT_TRUE(r.trivial_yes);
  EXPECT_EQ(r.trace.count("trivial_yes"), 1);
  EXPECT_EQ(r.trace.events.size(), 1u);
}

TEST(KernelizeAnnotated, RejectsInvalidInstances) {
  EXPECT_THROW(kernelize_annotated(AChvdInstance::make(oracle::cycle(4), 0, {})), InvariantError);
  // modulator vertex closes a hole with G - M
  EXPECT_THROW(kernelize_annotated(AChvdInstance::make(oracle::cycle(5), 0, {0})), InvariantError);
}

TEST(KernelizeAnnotated, EveryFiringIsEquivalent) {
  Rng rng(139);
  std::map<std::string, int> seen;
  for (int round = 0; round < 120; ++round) {
    Sample s = planted_sample(rng, 16);
    AnnotateResult ann = annotate(s.g, s.k, s.m0);
    if (ann.no_instance) continue;
    AChvdInstance a = ann.instance;
    // a few random forced pairs among adjacent modulator vertices
    std::vector<Edge> forced;
    for (auto [u, v] : a.g.edges())
      if (a.in_modulator(u) && a.in_modulator(v) && rng.chance(1, 3)) forced.push_back(make_edge(u, v));
    a = AChvdInstance::make(a.g, a.k, a.modulator, forced);
    KernelOptions opt;
    opt.observer = [&](const AChvdInstance& before, const AChvdInstance& after, const ReductionEvent& e) {
      ++seen[e.rule];
      EXPECT_EQ(answer(before), answer(after)) << e.rule;
      EXPECT_EQ(after.k, before.k);
      for (auto f : before.forced) {
        std::pair<int, int> lab{before.labels[f.first], before.labels[f.second]};
        bool kept = false;
        for (auto h : after.forced) {
          std::pair<int, int> got{after.labels[h.first], after.labels[h.second]};
          kept = kept || got == lab;
        }
        EXPECT_TRUE(kept);
      }
    };
    const bool truth = answer(a);
    AnnotatedKernel r = kernelize_annotated(a, opt);
    EXPECT_EQ(answer(r.instance), truth);
    if (!r.trivial_yes && !r.trivial_no) {
      EXPECT_TRUE(structural_report(r.instance).ok());
    }
  }
  EXPECT_GT(seen["rule4"] + seen["rule3"] + seen["rule1"], 0);
}

TEST(Gadgetize, NoForcedPairs) {
  AChvdInstance a = petals(2, 0);
  PlainInstance p = gadgetize(a, 100);
  EXPECT_EQ(p.g, a.g);
  EXPECT_EQ(p.k, 0);
  EXPECT_EQ(p.labels, a.labels);
}

TEST(Gadgetize, OneForcedPairIsOneC4) {
  Graph g = oracle::path(3);
  g.add_edge(0, 2);
  AChvdInstance a = AChvdInstance::make(g, 1, {0, 2}, {{2, 0}});
  ReductionEvent e;
  PlainInstance p = gadgetize(a, 3, &e);
  ASSERT_EQ(p.g.size(), 5);
  EXPECT_EQ(p.labels, (std::vector<int>{0, 1, 2, 3, 4}));
  EXPECT_EQ(e.added_vertices, (std::vector<int>{3, 4}));
  auto hs = oracle::holes(p.g);
  ASSERT_EQ(hs.size(), 1u);
  EXPECT_EQ(hs[0], oracle::to_set({0, 2, 3, 4}));
}

TEST(Gadgetize, RandomInstancesStayEquivalent) {
  Rng rng(149);
  for (int round = 0; round < 100; ++round) {
    const int n = rng.range(3, 9);
    Graph g = oracle::random_chordal(rng, n, rng.range(1, 5), 3);
    VertexList m;
    for (Vertex v = 0; v < n; ++v)
      if (rng.chance(1, 3)) m.push_back(v);
    std::vector<Edge> forced;
    for (auto [u, v] : g.edges())
      if (contains_sorted(m, u) && contains_sorted(m, v) && forced.size() < 3 && rng.chance(1, 2)) forced.emplace_back(u, v);
    AChvdInstance a = AChvdInstance::make(g, rng.range(0, 2), m, forced);
    PlainInstance p = gadgetize(a, n);
    EXPECT_EQ(p.g.size(), n + 2 * static_cast<int>(a.forced.size()));
    // every hole through a gadget vertex passes both ends of its pair
    for (oracle::Set h : oracle::holes(p.g))
      for (std::size_t i = 0; i < a.forced.size(); ++i) {
        Vertex x1 = n + 2 * static_cast<int>(i);
        if (h >> x1 & 1) {
          EXPECT_TRUE((h >> a.forced[i].first & 1) && (h >> a.forced[i].second & 1));
        }
      }
    EXPECT_EQ(answer(p.g, p.k), answer(a));
  }
}

TEST(Kernelize, C4WithEmptyBudgetIsNo) {
  KernelResult r = kernelize(oracle::cycle(4), 0, {0});
  EXPECT_TRUE(r.no_instance);
  EXPECT_EQ(r.kernel, canonical_no());
  EXPECT_FALSE(answer(r.kernel.g, r.kernel.k));
}

TEST(Kernelize, ChordalInputIsTriviallyYes) {
  KernelResult r = kernelize(oracle::path(8), 0, {});
  EXPECT_TRUE(r.trivial_yes);
  EXPECT_EQ(r.kernel, canonical_yes());
}

TEST(Kernelize, CanonicalInstancesHaveTheRightAnswers) {
  EXPECT_TRUE(answer(canonical_yes().g, canonical_yes().k));
  EXPECT_FALSE(answer(canonical_no().g, canonical_no().k));
  EXPECT_TRUE(check_instance(canonical_no_annotated()));
  EXPECT_FALSE(answer(canonical_no_annotated()));
}

TEST(Kernelize, RandomPlantedInstances) {
  Rng rng(151);
  int nontrivial = 0;
  for (int round = 0; round < 150; ++round) {
    Sample s = planted_sample(rng, 16);
    KernelResult r = kernelize(s.g, s.k, s.m0);
    EXPECT_EQ(answer(r.kernel.g, r.kernel.k), answer(s.g, s.k));
    EXPECT_LE(r.kernel.k, s.k);
    EXPECT_EQ(replay(s.g, s.k, r.trace), r.kernel);
    nontrivial += !r.no_instance && !r.trivial_yes;
  }
  EXPECT_GT(nontrivial, 10);
}

TEST(Replay, UnknownLabelThrows) {
  ReductionTrace t;
  ReductionEvent e;
  e.rule = "rule6";
  e.deleted = {42};
  t.events.push_back(e);
  EXPECT_THROW(replay(oracle::path(3), 0, t), std::invalid_argument);
}

#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <iomanip>
#include <mutex>
#include <thread>

#include "approx.hpp"
#include "generate.hpp"
#include "io.hpp"
#include "kernel.hpp"

namespace chvd {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  long long samples = 0;
  long long violations = 0;
  double seconds = 0;
  double time_limit = 0;  // 0 means unlimited
  std::string detail;
};

struct BenchOptions {
  std::uint64_t seed = 20240601;
  int threads = 0;  // 0: CHVD_THREADS or hardware concurrency
};

inline int bench_threads(const BenchOptions& opt) {
  if (opt.threads > 0) return opt.threads;
  if (const char* env = std::getenv("CHVD_THREADS")) {
    int t = std::atoi(env);
    if (t > 0) return t;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs fn(i) for i in [0, count) on a pool of workers; results keep index order.
template <class Fn>
auto parallel_map(int count, int threads, Fn&& fn) -> std::vector<decltype(fn(0))> {
  std::vector<decltype(fn(0))> out(count);
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_lock;
  auto worker = [&] {
    for (int i; (i = next++) < count;) {
      try {
        out[i] = fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> g(error_lock);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < std::min(threads, count); ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

namespace bench {

using Clock = std::chrono::steady_clock;

inline double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

inline GeneratorSpec random_spec(Rng& rng, int max_n, int max_planted) {
  GeneratorSpec s;
  s.seed = rng.next();
  s.planted = rng.range(1, max_planted);
  s.core = rng.range(3, std::max(3, max_n - s.planted));
  s.tree_nodes = rng.range(2, std::max(2, s.core));
  s.subtree_max = rng.range(1, 3);
  s.noise = rng.range(0, 4);
  return s;
}

// Every hole of weight below 1 - tol, found by checking all vertex subsets (n <= 16).
inline bool has_light_hole_brute(const Graph& g, const std::vector<double>& x, double tol) {
  const int n = g.size();
  for (std::uint32_t s = 0; s < (1u << n); ++s) {
    if (__builtin_popcount(s) < 4) continue;
    double w = 0;
    bool cycle = true;
    Vertex first = -1;
    for (Vertex v = 0; v < n && cycle; ++v) {
      if (!(s >> v & 1)) continue;
      if (first < 0) first = v;
      w += x[v];
      int deg = 0;
      for (Vertex u : g.neighbors(v)) deg += (s >> u & 1);
      cycle = deg == 2;
    }
    if (!cycle || w >= 1.0 - tol) continue;
    // 2-regular: a hole iff connected
    std::uint32_t seen = 1u << first;
    std::vector<Vertex> stack{first};
    while (!stack.empty()) {
      Vertex v = stack.back();
      stack.pop_back();
      for (Vertex u : g.neighbors(v))
        if ((s >> u & 1) && !(seen >> u & 1)) {
          seen |= 1u << u;
          stack.push_back(u);
        }
    }
    if (seen == s) return true;
  }
  return false;
}

inline std::string fmt(double v, int digits = 3) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(digits) << v;
  return o.str();
}

inline CriterionResult finish(CriterionResult r, Clock::time_point t0) {
  r.seconds = since(t0);
  r.pass = r.violations == 0 && (r.time_limit <= 0 || r.seconds < r.time_limit);
  return r;
}

}  // namespace bench

// Flower/cover duality on near-chordal graphs.
inline CriterionResult criterion_flower(const BenchOptions& opt, int count = 520) {
  auto t0 = bench::Clock::now();
  CriterionResult r{1, "flower/cover duality", false, count, 0, 0, 60.0, ""};
  struct Out {
    int bad = 0, small = 0, gaps = 0, order = 0;
  };
  auto res = parallel_map(count, bench_threads(opt), [&](int i) {
    Rng rng = Rng::derive(opt.seed + 1, i);
    Out o;
    GeneratorSpec s = bench::random_spec(rng, 30, 4);
    Generated gen = generate(s);
    Vertex v = rng.pick(gen.planted);
    VertexList keep = set_difference(members(full_mask(gen.g.size())), set_difference(gen.planted, {v}));
    Subgraph sub = induced_subgraph(gen.g, keep);
    const Graph& h = sub.graph;
    Vertex c = sub.from_parent[v];
    try {
      FlowerCover fc = flower_and_cover(h, c);
      o.order = fc.flower.order();
      Mask rest = full_mask(h.size());
      for (Vertex u : fc.cover) rest[u] = 0;
      bool ok = is_chordal(h, &rest) && !contains_sorted(fc.cover, c) &&
                static_cast<long long>(fc.cover.size()) <= 12LL * fc.flower.order() && is_valid_flower(h, fc.flower);
      if (ok && h.size() <= 14) {
        ++o.small;
        Mask fixed = mask_of(h.size(), {c});
        ExactOptions eo;
        eo.undeletable = &fixed;
        int best = chvd_optimum(h, eo);
        ok = best >= 0 && fc.flower.order() <= best && best <= static_cast<int>(fc.cover.size());
        o.gaps += static_cast<int>(fc.cover.size()) - best;
      }
      o.bad = ok ? 0 : 1;
    } catch (const std::exception&) {
      o.bad = 1;
    }
    return o;
  });
  int small = 0, gaps = 0, max_order = 0;
  for (const auto& o : res) {
    r.violations += o.bad;
    small += o.small;
    gaps += o.gaps;
    max_order = std::max(max_order, o.order);
  }
  r.detail = "exact checks " + std::to_string(small) + ", max order " + std::to_string(max_order) +
             ", total cover slack over optimum " + std::to_string(gaps);
  return bench::finish(r, t0);
}

struct KernelSample {
  Graph g;
  int k = 0;
  VertexList m0;
};

inline KernelSample kernel_sample(std::uint64_t seed, int index) {
  Rng rng = Rng::derive(seed, index);
  GeneratorSpec s = bench::random_spec(rng, 18, 3);
  Generated gen = generate(s);
  KernelSample ks;
  ks.g = gen.g;
  ks.k = rng.range(0, 3);
  ks.m0 = gen.planted;
  int extra = rng.range(0, 3);
  for (int j = 0; j < extra; ++j) ks.m0.push_back(static_cast<Vertex>(rng.below(gen.g.size())));
  sort_unique(ks.m0);
  return ks;
}

// Instances shaped so that the later rules have something to act on.
inline KernelSample constructed_sample(std::uint64_t seed, int index) {
  Rng rng = Rng::derive(seed, index);
  KernelSample ks;
  Graph& g = ks.g;
  switch (index % 3) {
    case 0: {
      // apexes over a long path, with pendants hanging off the path
      const int len = rng.range(16, 22), apexes = rng.range(2, 3), pendants = rng.range(0, 3);
      g = Graph(len);
      for (int i = 0; i + 1 < len; ++i) g.add_edge(i, i + 1);
      for (int p = 0; p < pendants; ++p) g.add_edge(g.add_vertex(), rng.range(4, len - 5));
      for (int a = 0; a < apexes; ++a) {
        Vertex x = g.add_vertex();
        g.add_edge(x, rng.range(0, 1));
        g.add_edge(x, len - 1 - rng.range(0, 1));
        ks.m0.push_back(x);
      }
      ks.k = rng.range(1, apexes - 1);
      break;
    }
    case 1: {
      // x and y joined by several disjoint two-vertex paths
      const int paths = rng.range(3, 5);
      g = Graph(2);
      for (int i = 0; i < paths; ++i) {
        Vertex a = g.add_vertex(), b = g.add_vertex();
        g.add_edge(0, a);
        g.add_edge(a, b);
        g.add_edge(b, 1);
        if (rng.chance(1, 3)) g.add_edge(b, g.add_vertex());
      }
      ks.m0 = {0, 1};
      ks.k = rng.range(0, 1);
      break;
    }
    default: {
      // one modulator vertex next to a clique above the k = 0 clique bound
      const int size = rng.range(5, 9);
      g = Graph(size + 1);
      for (int u = 0; u < size; ++u)
        for (int v = u + 1; v < size; ++v) g.add_edge(u, v);
      for (int u = 0; u < size; ++u)
        if (rng.chance(1, 2)) g.add_edge(size, u);
      for (int t = rng.range(0, 3); t > 0; --t) g.add_edge(g.add_vertex(), static_cast<Vertex>(rng.below(size)));
      ks.m0 = {size};
      ks.k = 0;
      break;
    }
  }
  // hide the construction order
  std::vector<Vertex> perm(g.size());
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  Graph h(g.size());
  for (auto [u, v] : g.edges()) h.add_edge(perm[u], perm[v]);
  g = std::move(h);
  for (Vertex& v : ks.m0) v = perm[v];
  sort_unique(ks.m0);
  return ks;
}

inline bool chvd_answer(const Graph& g, int k, const std::vector<Edge>& forced = {}) {
  return exact_chvd_forced(g, k, forced).has_value();
}

// Kernel equivalence, for the whole pipeline and for every single rule firing.
inline CriterionResult criterion_kernel(const BenchOptions& opt, int count = 320, int constructed = 60) {
  auto t0 = bench::Clock::now();
  CriterionResult r{2, "kernel soundness", false, count + constructed, 0, 0, 300.0, ""};
  struct Out {
    int bad = 0, firings = 0, nontrivial = 0;
    std::map<std::string, int> rules;
  };
  auto res = parallel_map(count + constructed, bench_threads(opt), [&](int i) {
    Out o;
    KernelSample ks = i < count ? kernel_sample(opt.seed + 2, i) : constructed_sample(opt.seed + 3, i - count);
    const bool truth = chvd_answer(ks.g, ks.k);
    try {
      auto ann = annotate(ks.g, ks.k, ks.m0);
      if (!ann.no_instance && chvd_answer(ann.instance.g, ann.instance.k) != truth) ++o.bad;
      if (ann.no_instance && truth) ++o.bad;
      KernelOptions ko;
      ko.observer = [&](const AChvdInstance& before, const AChvdInstance& after, const ReductionEvent& e) {
        ++o.firings;
        ++o.rules[e.rule];
        if (chvd_answer(before.g, before.k, before.forced) != chvd_answer(after.g, after.k, after.forced)) ++o.bad;
      };
      KernelResult kr = kernelize(ks.g, ks.k, ks.m0, ko);
      o.nontrivial = !kr.no_instance && !kr.trivial_yes;
      if (chvd_answer(kr.kernel.g, kr.kernel.k) != truth) ++o.bad;
      if (kr.kernel.k > ks.k) ++o.bad;
      if (!(replay(ks.g, ks.k, kr.trace) == kr.kernel)) ++o.bad;
    } catch (const std::exception&) {
      ++o.bad;
    }
    return o;
  });
  int firings = 0, nontrivial = 0;
  std::map<std::string, int> rules;
  for (const auto& o : res) {
    r.violations += o.bad;
    firings += o.firings;
    nontrivial += o.nontrivial;
    for (const auto& [name, c] : o.rules) rules[name] += c;
  }
  r.detail = std::to_string(count) + " random (n <= 18) + " + std::to_string(constructed) +
             " constructed (n <= 30); non-trivial kernels " + std::to_string(nontrivial) + ", firings checked " + std::to_string(firings) + " (";
  bool first = true;
  for (const auto& [name, c] : rules) {
    r.detail += (first ? "" : " ") + name + "=" + std::to_string(c);
    first = false;
  }
  r.detail += ")";
  return bench::finish(r, t0);
}

// Clique, component and |Z| ceilings after exhaustive reduction, recomputed from the formulas.
inline CriterionResult criterion_structure(const BenchOptions& opt, int count = 320, int constructed = 60) {
  auto t0 = bench::Clock::now();
  CriterionResult r{3, "structural postconditions", false, count + constructed, 0, 0, 0, ""};
  struct Out {
    int bad = 0, checked = 0;
    long long omega = 0, comps = 0, z = 0;
  };
  auto res = parallel_map(count + constructed, bench_threads(opt), [&](int i) {
    Out o;
    KernelSample ks = i < count ? kernel_sample(opt.seed + 2, i) : constructed_sample(opt.seed + 3, i - count);
    try {
      auto ann = annotate(ks.g, ks.k, ks.m0);
      if (ann.no_instance) return o;
      auto red = kernelize_annotated(ann.instance);
      if (red.trivial_yes || red.trivial_no) return o;
      const AChvdInstance& a = red.instance;
      const long long k = a.k, m = static_cast<long long>(a.modulator.size());
      const long long omega = (k + 1) * (m * m * m + (k + 3) * m * m);
      const long long inner = (k + 2) * omega + m;
      const long long comp_cap = (k + 1) * inner * inner + (k + 1) * (m + m * m) + 1;
      const long long z0 = 2 * omega, q1 = 2 + 2 * z0, z1 = omega * q1, q2 = q1 + 2 * z1, z2 = omega * q2;
      const long long z_cap = z2 + omega * (q2 - 1);
      Mask body = a.body();
      o.omega = clique_number(a.g, &body);
      if (o.omega > omega) ++o.bad;
      for (Vertex x : a.modulator) {
        Mask gx = body;
        for (Vertex w : a.g.neighbors(x)) gx[w] = 0;
        long long c = static_cast<long long>(connected_components(a.g, &gx).size());
        o.comps = std::max(o.comps, c);
        if (c > comp_cap) ++o.bad;
      }
      SeparatorSet s = build_SQ(a);
      Mask rest = body;
      for (Vertex v : s.sq) rest[v] = 0;
      for (const auto& comp : connected_components(a.g, &rest)) {
        long long z = static_cast<long long>(component_context(a, s, comp).z.size());
        o.z = std::max(o.z, z);
        if (z > z_cap) ++o.bad;
      }
      o.checked = 1;
    } catch (const std::exception&) {
      ++o.bad;
    }
    return o;
  });
  int checked = 0;
  long long omega = 0, comps = 0, z = 0;
  for (const auto& o : res) {
    r.violations += o.bad;
    checked += o.checked;
    omega = std::max(omega, o.omega);
    comps = std::max(comps, o.comps);
    z = std::max(z, o.z);
  }
  r.detail = "reduced instances " + std::to_string(checked) + ", max omega " + std::to_string(omega) +
             ", max components " + std::to_string(comps) + ", max |Z| " + std::to_string(z);
  return bench::finish(r, t0);
}

inline SkewInstance random_staircase(Rng& rng, int n) {
  SkewInstance s;
  s.d = DiGraph(n);
  std::vector<Vertex> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.chance(1, 3)) s.d.add_arc(perm[i], perm[j]);
  std::vector<Vertex> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  rng.shuffle(pool);
  const int a = rng.range(1, std::min(4, n / 2)), b = rng.range(1, std::min(4, n - a));
  s.tu.assign(pool.begin(), pool.begin() + a);
  s.tv.assign(pool.begin() + a, pool.begin() + a + b);
  std::vector<int> reach_j(a);
  int c = rng.range(0, b);
  for (int i = 0; i < a; ++i) {
    c = std::min(b, c + rng.range(0, 1));
    reach_j[i] = c;
  }
  if (reach_j[a - 1] == 0) reach_j[a - 1] = 1;
  for (int i = 0; i < a; ++i)
    for (int j = 0; j < reach_j[i]; ++j) s.pairs.emplace_back(s.tu[i], s.tv[j]);
  return s;
}

inline CriterionResult criterion_skew(const BenchOptions& opt, int count = 220) {
  auto t0 = bench::Clock::now();
  CriterionResult r{4, "skew multicut bound", false, count, 0, 0, 0, ""};
  struct Out {
    int bad = 0;
    double ratio = -1;
  };
  auto res = parallel_map(count, bench_threads(opt), [&](int i) {
    Rng rng = Rng::derive(opt.seed + 4, i);
    Out o;
    SkewInstance s = random_staircase(rng, rng.range(4, 16));
    try {
      auto lp = solve_fractional(s.as_multicut());
      VertexList x = skew_multicut(s, lp.solution);
      const double bound = lp.solution.total() * ceil_log2(static_cast<long long>(s.tu.size()) + 1) + 1e-6;
      if (!is_multicut(s.as_multicut(), x) || static_cast<double>(x.size()) > bound) ++o.bad;
      if (s.d.size() <= 12) {
        auto best = exact_multicut(s.as_multicut(), s.d.size());
        if (!best || best->size() > x.size()) ++o.bad;
        else if (!best->empty()) o.ratio = static_cast<double>(x.size()) / best->size();
      }
    } catch (const std::exception&) {
      ++o.bad;
    }
    return o;
  });
  double worst = 0, sum = 0;
  int compared = 0;
  for (const auto& o : res) {
    r.violations += o.bad;
    if (o.ratio >= 0) {
      ++compared;
      sum += o.ratio;
      worst = std::max(worst, o.ratio);
    }
  }
  r.detail = "optimum comparisons " + std::to_string(compared) + ", mean ratio " +
             bench::fmt(compared ? sum / compared : 0) + ", max ratio " + bench::fmt(worst);
  return bench::finish(r, t0);
}

// Long interval graphs with far-apart terminals, so that pairs survive the 1/8 threshold.
inline CriterionResult criterion_downward(const BenchOptions& opt, int count = 210) {
  auto t0 = bench::Clock::now();
  CriterionResult r{5, "downward multicut claims", false, count, 0, 0, 0, ""};
  struct Out {
    int bad = 0, pairs = 0, groups = 0;
  };
  auto res = parallel_map(count, bench_threads(opt), [&](int i) {
    Rng rng = Rng::derive(opt.seed + 5, i);
    Out o;
    // connected interval graph: consecutive intervals overlap
    const int n = rng.range(30, 60);
    std::vector<int> lo(n), hi(n);
    for (int v = 0, pos = 0; v < n; ++v) {
      pos += rng.range(1, 2);
      lo[v] = pos;
      hi[v] = pos + rng.range(2, 4);
    }
    Graph g(n);
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v)
        if (lo[v] <= hi[u] && lo[u] <= hi[v]) g.add_edge(u, v);
    try {
      CliqueTree t = build_clique_tree(g);
      t.reroot(rng.chance(1, 2) ? *t.node_containing({0}) : static_cast<int>(rng.below(t.num_nodes())));
      DownwardInstance down = build_downward(g, t);
      const Mask all = full_mask(g.size());
      const std::vector<double> unit(g.size(), 1.0);
      std::vector<Edge> terminals;
      for (int tries = 0; tries < 60 && terminals.size() < 8; ++tries) {
        Vertex u = static_cast<Vertex>(rng.below(g.size()));
        auto hops = detail::dag_dist(down.arcs, u, unit, all, true);
        VertexList far;
        for (Vertex v = 0; v < g.size(); ++v)
          if (v != u && hops[v] >= 12 && hops[v] < std::numeric_limits<double>::infinity()) far.push_back(v);
        if (!far.empty()) terminals.emplace_back(u, rng.pick(far));
      }
      std::sort(terminals.begin(), terminals.end());
      terminals.erase(std::unique(terminals.begin(), terminals.end()), terminals.end());
      MulticutInstance mi{down.arcs, terminals};
      FractionalSolution x;
      if (i % 4 == 0 || terminals.empty()) {
        x = solve_fractional(mi).solution;
      } else {
        // random weights scaled so that the lightest terminal path has weight exactly 1
        x.x.resize(g.size());
        for (double& w : x.x) w = 0.5 + static_cast<double>(rng.below(1000)) / 1000.0;
        double lightest = std::numeric_limits<double>::infinity();
        for (auto [u, v] : terminals) lightest = std::min(lightest, detail::dag_dist(down.arcs, u, x.x, all, true)[v]);
        for (double& w : x.x) w /= lightest;
      }
      DownwardReport rep;
      VertexList cut = downward_multicut(down, terminals, x, &rep);
      if (!is_multicut(mi, cut)) ++o.bad;
      const int np = static_cast<int>(rep.pairs.size());
      o.pairs = np;
      o.groups = static_cast<int>(rep.groups.size());
      for (int p = 0; p < np; ++p) {
        if (rep.mc2[p] < 1.0 - 1e-6) ++o.bad;
        for (int q = p + 1; q < np; ++q)
          if (!rep.overlap.adjacent(p, q) && !set_intersection(rep.inner[p], rep.inner[q]).empty()) ++o.bad;
      }
    } catch (const std::exception&) {
      ++o.bad;
    }
    return o;
  });
  long long pairs = 0, groups = 0, busy = 0;
  for (const auto& o : res) {
    r.violations += o.bad;
    pairs += o.pairs;
    groups += o.groups;
    busy += o.pairs > 0;
  }
  r.detail = "instances with surviving pairs " + std::to_string(busy) + ", pairs checked " + std::to_string(pairs) +
             ", clique groups " + std::to_string(groups);
  return bench::finish(r, t0);
}

inline CriterionResult criterion_approx(const BenchOptions& opt, int count = 220) {
  auto t0 = bench::Clock::now();
  CriterionResult r{6, "approximation validity", false, count, 0, 0, 0, ""};
  struct Out {
    int bad = 0, no_checked = 0, lp_above = 0;
    double ratio = -1;
  };
  auto res = parallel_map(count, bench_threads(opt), [&](int i) {
    Rng rng = Rng::derive(opt.seed + 6, i);
    Out o;
    try {
      // yes-instance: the planted set certifies opt <= k
      GeneratorSpec s = bench::random_spec(rng, 16, 3);
      Generated gen = generate(s);
      const int best = chvd_optimum(gen.g);
      for (bool guard : {false, true}) {
        ApproxOptions ao;
        ao.exact_guard = guard;
        ApproxResult ar = approximate(gen.g, gen.k, ao);
        Mask rest = full_mask(gen.g.size());
        for (Vertex v : ar.solution) rest[v] = 0;
        if (ar.no_instance || !is_chordal(gen.g, &rest)) ++o.bad;
        if (!guard && best > 0) o.ratio = static_cast<double>(ar.solution.size()) / best;
      }
      // no-instance: budget strictly below half the optimum
      GeneratorSpec ns = bench::random_spec(rng, 16, 5);
      ns.planted = std::max(ns.planted, 3);
      Generated ng = generate(ns);
      const int nbest = chvd_optimum(ng.g);
      if (nbest >= 1) {
        const int k = (nbest - 1) / 2;
        ApproxOptions ao;
        ao.exact_guard = false;
        ApproxResult ar = approximate(ng.g, k, ao);
        ++o.no_checked;
        if (ar.lp_value > 2.0 * k + 1e-6) {
          ++o.lp_above;
          if (!ar.no_instance) ++o.bad;
        }
        if (!ar.no_instance) {
          Mask rest = full_mask(ng.g.size());
          for (Vertex v : ar.solution) rest[v] = 0;
          if (!is_chordal(ng.g, &rest)) ++o.bad;
        }
      }
    } catch (const std::exception&) {
      ++o.bad;
    }
    return o;
  });
  double worst = 0, sum = 0;
  int compared = 0, no_checked = 0, lp_above = 0;
  for (const auto& o : res) {
    r.violations += o.bad;
    no_checked += o.no_checked;
    lp_above += o.lp_above;
    if (o.ratio >= 0) {
      ++compared;
      sum += o.ratio;
      worst = std::max(worst, o.ratio);
    }
  }
  r.detail = "ratio |X|/opt mean " + bench::fmt(compared ? sum / compared : 0) + " max " + bench::fmt(worst) +
             " over " + std::to_string(compared) + "; no-instances " + std::to_string(no_checked) +
             " (|x*| > 2k on " + std::to_string(lp_above) + ")";
  return bench::finish(r, t0);
}

inline CriterionResult criterion_lp(const BenchOptions& opt, int count = 220) {
  auto t0 = bench::Clock::now();
  CriterionResult r{7, "LP layer", false, count, 0, 0, 0, ""};
  const double tol = 1e-6;
  struct Out {
    int bad = 0, compared = 0;
    double gap = 0;
  };
  auto res = parallel_map(count, bench_threads(opt), [&](int i) {
    Rng rng = Rng::derive(opt.seed + 7, i);
    Out o;
    try {
      Generated gen = generate(bench::random_spec(rng, 16, 4));
      LpOptions lo;
      lo.tolerance = tol;
      LpResult lp = solve_fractional(gen.g, lo);
      const auto& x = lp.solution;
      for (double v : x.x)
        if (v < -tol) ++o.bad;
      if (separate_chvd(gen.g, x)) ++o.bad;
      if (gen.g.size() <= 16 && bench::has_light_hole_brute(gen.g, x.x, tol)) ++o.bad;
      // the packing over the final pool certifies the same value
      double dual = 0;
      std::vector<double> load(gen.g.size(), 0);
      for (std::size_t c = 0; c < lp.constraints.size(); ++c) {
        if (lp.dual[c] < -tol) ++o.bad;
        dual += lp.dual[c];
        for (Vertex v : lp.constraints[c]) load[v] += lp.dual[c];
      }
      for (double l : load)
        if (l > 1 + 1e-6) ++o.bad;
      if (std::abs(dual - x.total()) > 1e-6) ++o.bad;
      if (gen.g.size() <= 14) {
        ++o.compared;
        int best = chvd_optimum(gen.g);
        if (x.total() > best + tol) ++o.bad;
        o.gap = best - x.total();
      }
    } catch (const std::exception&) {
      ++o.bad;
    }
    return o;
  });
  int compared = 0;
  double gap = 0;
  for (const auto& o : res) {
    r.violations += o.bad;
    compared += o.compared;
    gap = std::max(gap, o.gap);
  }
  r.detail = "exact comparisons " + std::to_string(compared) + ", largest integrality gap " + bench::fmt(gap, 4);
  return bench::finish(r, t0);
}

inline InstanceFile fuzz_instance_file(Rng& rng) {
  InstanceFile f;
  f.n = rng.range(0, 20);
  f.k = rng.range(0, 9);
  for (int u = 0; u < f.n; ++u)
    for (int v = u + 1; v < f.n; ++v)
      if (rng.chance(1, 4)) f.edges.push_back(rng.chance(1, 2) ? Edge{u, v} : Edge{v, u});
  rng.shuffle(f.edges);
  for (int v = 0; v < f.n; ++v)
    if (rng.chance(1, 5)) f.modulator.push_back(v);
  rng.shuffle(f.modulator);
  Mask in_m = mask_of(f.n, f.modulator);
  for (auto [u, v] : f.edges)
    if (in_m[u] && in_m[v] && rng.chance(1, 2)) f.forced.push_back(rng.chance(1, 2) ? Edge{u, v} : Edge{v, u});
  f.extended_header = !f.modulator.empty() || !f.forced.empty() || rng.chance(1, 3);
  const std::string alphabet = "abcdefghijklmnopqrstuvwxyz0123456789 _-=:.";
  for (int c = rng.range(0, 3); c > 0; --c) {
    std::string s;
    for (int j = rng.range(0, 24); j > 0; --j) s += alphabet[rng.below(alphabet.size())];
    f.comments.push_back(s);
  }
  return f;
}

// Pipeline outputs for one seed, serialized.
inline std::string pipeline_fingerprint(std::uint64_t seed) {
  Rng rng(seed);
  Generated gen = generate(bench::random_spec(rng, 18, 3));
  std::string out = emit_instance(make_instance_file(gen.g, gen.k));
  ApproxOptions ao;
  ao.exact_guard = false;
  ApproxResult ar = approximate(gen.g, gen.k, ao);
  out += emit_solution(ar.solution);
  if (!ar.no_instance) {
    KernelResult kr = kernelize(gen.g, gen.k, ar.solution);
    out += emit_instance(make_instance_file(kr.kernel.g, kr.kernel.k));
    out += emit_trace(kr.trace);
  }
  return out;
}

inline CriterionResult criterion_determinism(const BenchOptions& opt, int seeds = 40, int files = 1000) {
  auto t0 = bench::Clock::now();
  CriterionResult r{8, "determinism and round-trip", false, seeds + files, 0, 0, 0, ""};
  auto first = parallel_map(seeds, bench_threads(opt), [&](int i) { return pipeline_fingerprint(opt.seed + 8 + i); });
  auto second = parallel_map(seeds, 1, [&](int i) { return pipeline_fingerprint(opt.seed + 8 + i); });
  for (int i = 0; i < seeds; ++i) r.violations += first[i] != second[i];
  Rng rng(opt.seed + 9);
  for (int i = 0; i < files; ++i) {
    InstanceFile f = fuzz_instance_file(rng);
    try {
      std::string text = emit_instance(f);
      InstanceFile back = parse_instance(text);
      if (!(back == f) || emit_instance(back) != text) ++r.violations;
    } catch (const std::exception&) {
      ++r.violations;
    }
  }
  r.detail = std::to_string(seeds) + " pipeline reruns, " + std::to_string(files) + " fuzzed files";
  return bench::finish(r, t0);
}

inline std::vector<CriterionResult> run_acceptance(const BenchOptions& opt) {
  return {criterion_flower(opt),   criterion_kernel(opt), criterion_structure(opt), criterion_skew(opt),
          criterion_downward(opt), criterion_approx(opt), criterion_lp(opt),        criterion_determinism(opt)};
}

inline std::string format_line(const CriterionResult& r) {
  std::ostringstream o;
  o << "[" << (r.pass ? "PASS" : "FAIL") << "] " << r.id << " " << r.name << ": " << r.samples << " samples, "
    << r.violations << " violations, " << bench::fmt(r.seconds, 1) << " s";
  if (r.time_limit > 0) o << " (limit " << bench::fmt(r.time_limit, 0) << " s)";
  o << "; " << r.detail;
  return o.str();
}

inline Json to_json(const CriterionResult& r) {
  Json j;
  j["id"] = r.id;
  j["name"] = r.name;
  j["pass"] = r.pass;
  j["samples"] = r.samples;
  j["violations"] = r.violations;
  j["seconds"] = r.seconds;
  j["time_limit"] = r.time_limit;
  j["detail"] = r.detail;
  return j;
}

}  // namespace chvd

#pragma once

#include "exact.hpp"
#include "multicut.hpp"

namespace chvd {

// Deletion set X with no hole through L in G[A u B] - X, where L is a maximal clique of G[A].
inline VertexList hit_holes_through(const Graph& g, const VertexList& a, const VertexList& b, const VertexList& l,
                                    const FractionalSolution& x) {
  const int n = g.size();
  Mask in_a = mask_of(n, a), in_b = mask_of(n, b);
  for (Vertex v : a)
    if (in_b[v]) throw std::invalid_argument("A and B overlap");
  if (!is_clique(g, b)) throw std::invalid_argument("B is not a clique");
  for (Vertex v : b)
    if (x[v] != 0.0) throw std::invalid_argument("x must vanish on B");
  for (Vertex v : a)
    if (!(x[v] < 0.1)) throw std::invalid_argument("x must stay below 1/10 on A");
  auto rec = recognize(g, &in_a);
  if (!std::holds_alternative<Peo>(rec)) throw std::invalid_argument("G[A] is not chordal");
  {
    Subgraph ab = induced_subgraph(g, set_union(a, b));
    FractionalSolution xs;
    xs.tolerance = x.tolerance;
    for (Vertex v : ab.to_parent) xs.x.push_back(x[v]);
    if (separate_chvd(ab.graph, xs)) throw std::invalid_argument("x is not a fractional solution of G[A u B]");
  }
  CliqueTree t = build_clique_tree(g, std::get<Peo>(rec));
  VertexList lbag = l;
  std::sort(lbag.begin(), lbag.end());
  auto root = t.node_with_bag(lbag);
  if (!root) throw std::invalid_argument("L is not a maximal clique of G[A]");
  t.reroot(*root);
  DownwardInstance down = build_downward(g, std::move(t), &in_a);

  std::vector<Edge> terminals;
  for (Vertex u : a) {
    auto dist = detail::dag_dist(down.arcs, u, x.x, in_a, true);
    for (Vertex v : a)
      if (v != u && dist[v] < std::numeric_limits<double>::infinity() && at_least(dist[v], 0.1))
        terminals.emplace_back(u, v);
  }
  FractionalSolution x10 = x.scaled(10.0);
  for (Vertex v = 0; v < n; ++v)
    if (!in_a[v]) x10.x[v] = 0;
  VertexList cut = downward_multicut(down, terminals, x10);

  Mask rest(n, 0);
  for (Vertex v = 0; v < n; ++v) rest[v] = in_a[v] || in_b[v];
  for (Vertex v : cut) rest[v] = 0;
  for (Vertex v : lbag)
    if (rest[v]) ensure(!find_hole_through(g, v, &rest), "a hole still passes through L");
  return cut;
}

// ChVD on G[A u B] with G[A] chordal and B a clique, guided by a fractional solution x.
inline VertexList chvd_clique_plus_chordal(const Graph& g, const VertexList& a, const VertexList& b,
                                           const FractionalSolution& x) {
  const int n = g.size();
  Mask in_a = mask_of(n, a), in_b = mask_of(n, b);
  if (!is_clique(g, b)) throw std::invalid_argument("B is not a clique");
  if (!is_chordal(g, &in_a)) throw std::invalid_argument("G[A] is not chordal");
  VertexList sol;
  for (Vertex v = 0; v < n; ++v)
    if ((in_a[v] || in_b[v]) && at_least(x[v], 1.0 / 20)) {
      sol.push_back(v);
      in_a[v] = in_b[v] = 0;
    }
  FractionalSolution x2 = x;
  for (Vertex v = 0; v < n; ++v) x2.x[v] = in_a[v] ? 2 * x[v] : 0.0;
  const int rounds_cap = ceil_log2(static_cast<long long>(std::ceil(1.0 + x2.total() - 1e-9)));
  std::vector<int> visits(n, 0);
  while (true) {
    VertexList heavy;
    double heavy_w = -1;
    for (auto& comp : connected_components(g, &in_a)) {
      double w = x2.sum(comp);
      if (w > heavy_w + 1e-12) {
        heavy_w = w;
        heavy = comp;
      }
    }
    if (heavy.empty() || !at_least(heavy_w, 1.0)) break;
    for (Vertex v : heavy) ensure(++visits[v] <= std::max(1, rounds_cap), "halving loop exceeded its round bound");
    Mask in_c = mask_of(n, heavy);
    VertexList l = central_bag(g, x2.x, &in_c);
    VertexList xc = hit_holes_through(g, heavy, members(in_b), l, x2);
    for (Vertex v : xc) {
      sol.push_back(v);
      in_a[v] = in_b[v] = 0;
    }
    for (Vertex v : l) in_a[v] = 0;
  }
  sort_unique(sol);
  Mask check(n, 0);
  for (Vertex v : a) check[v] = 1;
  for (Vertex v : b) check[v] = 1;
  for (Vertex v : sol) check[v] = 0;
  ensure(is_chordal(g, &check), "clique-plus-chordal solution leaves a hole");
  return sol;
}

struct CliqueCut {
  VertexList z;  // separator, contains k
  VertexList k;  // the maximal clique inside it
};

namespace detail {

inline bool balanced_after(const Graph& g, const Mask& rest, int limit) {
  for (const auto& c : connected_components(g, &rest))
    if (static_cast<int>(c.size()) > limit) return false;
  return true;
}

inline long long binom_sum(int n, int k) {
  long long total = 0, c = 1;
  for (int i = 0; i <= k && i <= n; ++i) {
    total += c;
    if (total > (1LL << 40)) return total;
    c = c * (n - i) / (i + 1);
  }
  return total;
}

// Smallest Y (|Y| <= budget) splitting the live vertices into parts of size <= limit.
inline std::optional<VertexList> balanced_separator(const Graph& g, const Mask& live, int limit, int budget) {
  VertexList pool = members(live);
  if (binom_sum(static_cast<int>(pool.size()), budget) <= 200000) {
    return enumerate_subsets(pool, budget, [&](const VertexList& y) {
      Mask rest = live;
      for (Vertex v : y) rest[v] = 0;
      return balanced_after(g, rest, limit);
    });
  }
  // greedy fallback: repeatedly drop the vertex that shrinks the largest part most
  Mask rest = live;
  VertexList y;
  while (!balanced_after(g, rest, limit)) {
    if (static_cast<int>(y.size()) >= budget) return std::nullopt;
    Vertex best = -1;
    int best_size = std::numeric_limits<int>::max();
    for (Vertex v : members(rest)) {
      rest[v] = 0;
      int largest = 0;
      for (const auto& c : connected_components(g, &rest)) largest = std::max(largest, static_cast<int>(c.size()));
      rest[v] = 1;
      if (largest < best_size) {
        best_size = largest;
        best = v;
      }
    }
    rest[best] = 0;
    y.push_back(best);
  }
  std::sort(y.begin(), y.end());
  return y;
}

}  // namespace detail

// Clique K plus at most k further vertices whose removal leaves parts of size <= 3n/4.
inline std::optional<CliqueCut> balanced_clique_cut(const Graph& g, int k, const Mask* alive = nullptr) {
  Mask live = alive ? *alive : full_mask(g.size());
  const int n = static_cast<int>(members(live).size());
  auto cliques = maximal_cliques(g, &live);
  const VertexList* biggest = nullptr;
  for (const auto& c : cliques)
    if (!biggest || c.size() > biggest->size()) biggest = &c;
  if (biggest && 4 * static_cast<int>(biggest->size()) >= n) return CliqueCut{*biggest, *biggest};
  std::optional<CliqueCut> best;
  for (const auto& c : cliques) {
    Mask rest = live;
    for (Vertex v : c) rest[v] = 0;
    const int remaining = n - static_cast<int>(c.size());
    int budget = best ? static_cast<int>(best->z.size() - best->k.size()) - 1 : k;
    if (budget < 0) break;
    if (auto y = detail::balanced_separator(g, rest, 2 * remaining / 3, budget)) {
      best = CliqueCut{set_union(c, *y), c};
      if (y->empty()) break;
    }
  }
  return best;
}

struct Decomposition {
  VertexList a0;                   // chordal remainder
  std::vector<VertexList> cliques; // removed cliques in order
  VertexList x0;                   // non-clique separator vertices
  int steps = 0;
};

inline double decomposition_step_cap(int n, int k) {
  if (n <= 1) return k;
  return k * (std::log(static_cast<double>(n)) / std::log(4.0 / 3.0) + 1.0);
}

// Peels balanced clique separators off non-chordal components; nullopt certifies a NO-instance.
inline std::optional<Decomposition> decompose(const Graph& g, int k, const Mask* alive = nullptr) {
  Mask live = alive ? *alive : full_mask(g.size());
  const int n = static_cast<int>(members(live).size());
  const double cap = decomposition_step_cap(n, k);
  Decomposition d;
  while (true) {
    VertexList target;
    for (auto& comp : connected_components(g, &live)) {
      Mask m = mask_of(g.size(), comp);
      if (!is_chordal(g, &m)) {
        target = comp;
        break;
      }
    }
    if (target.empty()) break;
    if (k <= 0) return std::nullopt;
    Mask m = mask_of(g.size(), target);
    auto cut = balanced_clique_cut(g, k, &m);
    if (!cut) return std::nullopt;
    d.cliques.push_back(cut->k);
    for (Vertex v : set_difference(cut->z, cut->k)) d.x0.push_back(v);
    for (Vertex v : cut->z) live[v] = 0;
    if (++d.steps > cap) return std::nullopt;
  }
  sort_unique(d.x0);
  d.a0 = members(live);
  return d;
}

struct ApproxOptions {
  bool exact_guard = true;  // small n relative to k goes to the exact oracle
  LpOptions lp;
};

struct ApproxResult {
  bool no_instance = false;
  VertexList solution;
  double lp_value = 0;
  bool used_oracle = false;
  int decomposition_steps = 0;
  std::string reason;
};

inline bool oracle_guard(int n, int k) {
  double klogk = k <= 1 ? 0.0 : k * std::log2(static_cast<double>(k));
  return n > 1 && std::log2(static_cast<double>(n)) > klogk;
}

inline ApproxResult approximate(const Graph& g, int k, const ApproxOptions& opt = {}) {
  ApproxResult r;
  if (k < 0) {
    r.no_instance = true;
    r.reason = "negative budget";
    return r;
  }
  if (opt.exact_guard && oracle_guard(g.size(), k)) {
    r.used_oracle = true;
    auto s = exact_chvd(g, k);
    if (!s) {
      r.no_instance = true;
      r.reason = "exact oracle found no solution";
    } else {
      r.solution = *s;
    }
    return r;
  }
  auto lp = solve_fractional(g, opt.lp);
  r.lp_value = lp.solution.total();
  if (r.lp_value > 2.0 * k + 1e-6) {
    r.no_instance = true;
    r.reason = "fractional optimum exceeds 2k";
    return r;
  }
  const FractionalSolution& x = lp.solution;
  Mask live = full_mask(g.size());
  VertexList sol;
  for (Vertex v = 0; v < g.size(); ++v)
    if (at_least(x[v], 0.25)) {
      sol.push_back(v);
      live[v] = 0;
    }
  auto d = decompose(g, k, &live);
  if (!d) {
    r.no_instance = true;
    r.reason = "balanced clique decomposition failed";
    return r;
  }
  r.decomposition_steps = d->steps;
  sol.insert(sol.end(), d->x0.begin(), d->x0.end());
  VertexList a = d->a0;
  for (const auto& clique : d->cliques) {
    VertexList merged = set_union(a, clique);
    VertexList xi = chvd_clique_plus_chordal(g, a, clique, x);
    sol.insert(sol.end(), xi.begin(), xi.end());
    a = set_difference(merged, xi);
  }
  sort_unique(sol);
  Mask rest = full_mask(g.size());
  for (Vertex v : sol) rest[v] = 0;
  ensure(is_chordal(g, &rest), "approximate solution leaves a hole");
  r.solution = sol;
  return r;
}

}  // namespace chvd

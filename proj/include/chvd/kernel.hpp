#pragma once

#include <functional>
#include <set>

#include "flower.hpp"

namespace chvd {

// ChVD instance with a tidy modulator M and forced pairs inside M.
struct AChvdInstance {
  Graph g;
  int k = 0;
  VertexList modulator;       // sorted
  std::vector<Edge> forced;   // sorted (u < v) pairs
  std::vector<int> labels;    // stable provenance id of every vertex

  static AChvdInstance make(Graph g, int k, VertexList m, std::vector<Edge> forced = {}) {
    AChvdInstance a;
    a.labels.resize(g.size());
    std::iota(a.labels.begin(), a.labels.end(), 0);
    a.g = std::move(g);
    a.k = k;
    sort_unique(m);
    a.modulator = std::move(m);
    for (auto& e : forced) e = make_edge(e.first, e.second);
    std::sort(forced.begin(), forced.end());
    forced.erase(std::unique(forced.begin(), forced.end()), forced.end());
    a.forced = std::move(forced);
    return a;
  }

  int size() const { return g.size(); }
  Mask modulator_mask() const { return mask_of(g.size(), modulator); }
  bool in_modulator(Vertex v) const { return contains_sorted(modulator, v); }
  // live vertices of G - M
  Mask body() const {
    Mask b(g.size(), 1);
    for (Vertex v : modulator) b[v] = 0;
    return b;
  }
  bool is_forced(Vertex u, Vertex v) const {
    return std::binary_search(forced.begin(), forced.end(), make_edge(u, v));
  }
};

inline bool check_instance(const AChvdInstance& a, std::string* why = nullptr) {
  auto fail = [&](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  const int n = a.g.size();
  if (static_cast<int>(a.labels.size()) != n) return fail("label count mismatch");
  if (!std::is_sorted(a.modulator.begin(), a.modulator.end()) ||
      std::adjacent_find(a.modulator.begin(), a.modulator.end()) != a.modulator.end())
    return fail("modulator not sorted and unique");
  for (Vertex v : a.modulator)
    if (v < 0 || v >= n) return fail("modulator vertex out of range");
  for (auto [u, v] : a.forced) {
    if (u >= v || u < 0 || v >= n) return fail("malformed forced pair");
    if (!a.in_modulator(u) || !a.in_modulator(v)) return fail("forced pair leaves the modulator");
    if (!a.g.adjacent(u, v)) return fail("forced pair is not an edge");
  }
  if (!std::is_sorted(a.forced.begin(), a.forced.end())) return fail("forced pairs not sorted");
  Mask body = a.body();
  if (!is_chordal(a.g, &body)) return fail("G - M is not chordal");
  for (Vertex v : a.modulator) {
    Mask m = body;
    m[v] = 1;
    if (!is_chordal(a.g, &m)) return fail("modulator is not tidy at vertex " + std::to_string(v));
  }
  return true;
}

inline void validate_instance(const AChvdInstance& a) {
  std::string why;
  if (!check_instance(a, &why)) throw InvariantError("invalid annotated instance: " + why);
}

struct ReductionEvent {
  std::string rule;
  std::string note;
  std::vector<int> witness;                     // labels
  std::vector<int> deleted;                     // labels
  std::vector<std::pair<int, int>> added_edges; // labels
  std::vector<std::pair<int, int>> forced;      // labels
  std::vector<int> modulator_added;             // labels
  std::vector<int> added_vertices;              // labels of new vertices
  int k_delta = 0;
  std::vector<std::pair<std::string, long long>> counters;

  bool operator==(const ReductionEvent&) const = default;
};

struct ReductionTrace {
  std::vector<ReductionEvent> events;
  int count(const std::string& rule) const {
    int c = 0;
    for (const auto& e : events) c += e.rule == rule ? 1 : 0;
    return c;
  }
};

namespace detail {

inline long long sat_add(long long a, long long b) {
  const long long cap = 1LL << 60;
  return std::min(cap, a + b);
}
inline long long sat_mul(long long a, long long b) {
  const long long cap = 1LL << 60;
  if (a == 0 || b == 0) return 0;
  if (a > cap / b) return cap;
  return std::min(cap, a * b);
}

}  // namespace detail

// Numeric thresholds that depend on k and |M| only.
struct KernelParams {
  long long omega = 0;              // largest allowed clique in G - M
  long long rule4_budget = 0;       // components kept per non-neighbour y
  long long component_ceiling = 0;  // components of G(not x) after reduction

  static KernelParams of(int k, int m) {
    using detail::sat_add;
    using detail::sat_mul;
    KernelParams p;
    const long long k1 = k + 1, mm = m;
    p.omega = sat_mul(k1, sat_add(sat_mul(mm, sat_mul(mm, mm)), sat_mul(k + 3, sat_mul(mm, mm))));
    long long inner = sat_add(sat_mul(k + 2, p.omega), mm);
    p.rule4_budget = sat_add(sat_mul(k1, sat_mul(inner, inner)), 1);
    p.component_ceiling = sat_add(sat_add(sat_mul(k1, sat_mul(inner, inner)), sat_mul(k1, mm + mm * mm)), 1);
    return p;
  }

  // Ceiling on |Z| for one component, following the layered marking with bags of size <= omega.
  long long z_ceiling() const {
    using detail::sat_add;
    using detail::sat_mul;
    long long w = omega;
    long long z0 = sat_mul(2, w);
    long long q1 = sat_add(2, sat_mul(2, z0));
    long long z1 = sat_mul(w, q1);
    long long q2 = sat_add(q1, sat_mul(2, z1));
    long long z2 = sat_mul(w, q2);
    return sat_add(z2, sat_mul(w, q2 - 1));
  }
};

namespace detail {

inline std::vector<int> labels_of(const AChvdInstance& a, const VertexList& vs) {
  std::vector<int> out;
  for (Vertex v : vs) out.push_back(a.labels.at(v));
  return out;
}

inline void remove_vertices(AChvdInstance& a, const VertexList& vs) {
  Subgraph s = chvd::remove_vertices(a.g, vs);
  std::vector<int> labels;
  for (Vertex v : s.to_parent) labels.push_back(a.labels[v]);
  VertexList m;
  for (Vertex v : a.modulator)
    if (s.from_parent[v] >= 0) m.push_back(s.from_parent[v]);
  std::vector<Edge> f;
  for (auto [u, v] : a.forced)
    if (s.from_parent[u] >= 0 && s.from_parent[v] >= 0) f.emplace_back(s.from_parent[u], s.from_parent[v]);
  a.g = std::move(s.graph);
  a.labels = std::move(labels);
  a.modulator = std::move(m);
  a.forced = std::move(f);
}

inline void force_pair(AChvdInstance& a, Vertex x, Vertex y) {
  a.g.add_edge(x, y);
  Edge e = make_edge(x, y);
  a.forced.insert(std::lower_bound(a.forced.begin(), a.forced.end(), e), e);
}

// V(x1,..,not y1,..): vertices outside M adjacent to every positive and to no negative vertex.
inline VertexList selector(const AChvdInstance& a, const VertexList& pos, const VertexList& neg) {
  VertexList out;
  for (Vertex v = 0; v < a.g.size(); ++v) {
    if (a.in_modulator(v)) continue;
    bool ok = true;
    for (Vertex x : pos) ok = ok && a.g.adjacent(v, x);
    for (Vertex y : neg) ok = ok && !a.g.adjacent(v, y);
    if (ok) out.push_back(v);
  }
  return out;
}

// Live mask of G(not x).
inline Mask not_adjacent_mask(const AChvdInstance& a, Vertex x) {
  Mask m = a.body();
  for (Vertex w : a.g.neighbors(x)) m[w] = 0;
  return m;
}

inline bool touches(const Graph& g, const VertexList& comp, Vertex x) {
  for (Vertex v : comp)
    if (g.adjacent(v, x)) return true;
  return false;
}

inline ReductionEvent deletion_event(const AChvdInstance& a, const std::string& rule, const VertexList& del) {
  ReductionEvent e;
  e.rule = rule;
  e.deleted = labels_of(a, del);
  return e;
}

inline CliqueTree body_tree(const AChvdInstance& a) {
  Mask body = a.body();
  auto r = recognize(a.g, &body);
  ensure(std::holds_alternative<Peo>(r), "G - M is not chordal");
  return build_clique_tree(a.g, std::get<Peo>(r));
}

}  // namespace detail

// Nodes q having an xy-path with all inner vertices in G - M and their subtrees inside T_q,
// none of whose children have one.
inline std::vector<int> bottom_good_nodes(const AChvdInstance& a, const CliqueTree& t, Vertex x, Vertex y) {
  const int n = a.g.size();
  std::vector<int> top(n, -1);
  for (Vertex v = 0; v < n; ++v)
    if (!a.in_modulator(v) && t.covers(v)) top[v] = t.top(v);
  std::vector<char> good(t.num_nodes(), 0);
  for (int q = 0; q < t.num_nodes(); ++q) {
    Mask w(n, 0);
    bool any = false;
    for (Vertex v = 0; v < n; ++v)
      if (top[v] >= 0 && t.is_ancestor(q, top[v])) {
        w[v] = 1;
        any = true;
      }
    if (!any) continue;
    for (const auto& comp : connected_components(a.g, &w))
      if (detail::touches(a.g, comp, x) && detail::touches(a.g, comp, y)) {
        good[q] = 1;
        break;
      }
  }
  std::vector<int> out;
  for (int q = 0; q < t.num_nodes(); ++q) {
    if (!good[q]) continue;
    bool child_good = false;
    for (int c : t.children(q)) child_good = child_good || good[c];
    if (!child_good) out.push_back(q);
  }
  return out;
}

inline std::optional<ReductionEvent> rule1_common_neighbours(AChvdInstance& a) {
  const auto& m = a.modulator;
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = i + 1; j < m.size(); ++j) {
      Vertex x = m[i], y = m[j];
      if (a.g.adjacent(x, y)) continue;
      VertexList common = detail::selector(a, {x, y}, {});
      Mask cm = mask_of(a.g.size(), common);
      VertexList mis = mis_chordal(a.g, &cm);
      if (static_cast<long long>(mis.size()) >= a.k + 2LL) {
        ReductionEvent e;
        e.rule = "rule1";
        mis.resize(a.k + 2);
        e.witness = detail::labels_of(a, mis);
        e.forced = {{a.labels[x], a.labels[y]}};
        e.counters = {{"independent", static_cast<long long>(mis.size())}};
        detail::force_pair(a, x, y);
        return e;
      }
    }
  return std::nullopt;
}

inline std::optional<ReductionEvent> rule2_xy_good(AChvdInstance& a, const CliqueTree& t) {
  const auto& m = a.modulator;
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = i + 1; j < m.size(); ++j) {
      Vertex x = m[i], y = m[j];
      if (a.g.adjacent(x, y)) continue;
      auto q = bottom_good_nodes(a, t, x, y);
      if (static_cast<long long>(q.size()) >= a.k + 2LL) {
        ReductionEvent e;
        e.rule = "rule2";
        e.forced = {{a.labels[x], a.labels[y]}};
        e.counters = {{"bottom_good_nodes", static_cast<long long>(q.size())}};
        detail::force_pair(a, x, y);
        return e;
      }
    }
  return std::nullopt;
}

inline std::optional<ReductionEvent> rule2_xy_good(AChvdInstance& a) {
  CliqueTree t = detail::body_tree(a);
  return rule2_xy_good(a, t);
}

// Deletes one unmarked vertex of a clique K of G - M larger than the clique bound.
inline std::optional<ReductionEvent> rule3_reduce_clique(AChvdInstance& a, const VertexList& clique) {
  const KernelParams par = KernelParams::of(a.k, static_cast<int>(a.modulator.size()));
  VertexList kk = clique;
  sort_unique(kk);
  if (static_cast<long long>(kk.size()) <= par.omega) throw std::invalid_argument("clique is under the threshold");
  for (Vertex v : kk)
    if (a.in_modulator(v)) throw std::invalid_argument("clique meets the modulator");
  if (!is_clique(a.g, kk)) throw std::invalid_argument("vertex set is not a clique");
  CliqueTree t = detail::body_tree(a);
  auto p = t.node_containing(kk);
  ensure(p.has_value(), "clique not contained in any bag");
  t.reroot(*p);
  if (auto e = rule2_xy_good(a, t)) {
    e->rule = "rule3";
    e->note = "xy-good";
    return e;
  }
  const auto& m = a.modulator;
  const long long cap = a.k + 1LL;
  Mask marked(a.g.size(), 0);
  long long marks = 0;
  auto mark_sorted = [&](VertexList cand, auto&& key) {
    std::stable_sort(cand.begin(), cand.end(), [&](Vertex u, Vertex v) { return key(u) < key(v); });
    long long c = 0;
    for (Vertex v : cand) {
      if (c >= cap) break;
      ++c;
      if (!marked[v]) {
        marked[v] = 1;
        ++marks;
      }
    }
  };
  auto in_k = [&](const VertexList& s) { return set_intersection(kk, s); };
  auto by_id = [](Vertex v) { return v; };
  // (a) triples
  for (Vertex x1 : m)
    for (Vertex x2 : m)
      for (Vertex y : m) mark_sorted(in_k(detail::selector(a, {x1, x2}, {y})), by_id);
  // (b) far from every bottom good node
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = i + 1; j < m.size(); ++j) {
      if (a.g.adjacent(m[i], m[j])) continue;
      VertexList cand = in_k(detail::selector(a, {m[i], m[j]}, {}));
      for (int q : bottom_good_nodes(a, t, m[i], m[j]))
        mark_sorted(cand, [&](Vertex u) { return std::make_pair(-t.distance_to_node(u, q), u); });
    }
  // boundary node p^y of the component A^y of G(not y) meeting the root bag
  std::vector<int> px(a.g.size(), t.root());
  for (Vertex y : m) {
    Mask gy = detail::not_adjacent_mask(a, y);
    Vertex seed = -1;
    for (Vertex v : t.bag(t.root()))
      if (gy[v]) {
        seed = v;
        break;
      }
    if (seed < 0) continue;
    VertexList comp;
    for (auto& c : connected_components(a.g, &gy))
      if (contains_sorted(c, seed)) comp = c;
    Mask body = a.body();
    VertexList nb = neighborhood(a.g, comp, &body);
    auto node = t.node_containing(nb);
    ensure(node.has_value(), "neighbourhood of a G(not y) component is not a clique");
    px[y] = *node;
  }
  // (c) and (d) close to p^y
  for (Vertex x : m)
    for (Vertex y : m) {
      auto near = [&](Vertex u) { return std::make_pair(t.distance_to_node(u, px[y]), u); };
      mark_sorted(in_k(detail::selector(a, {x}, {y})), near);
      mark_sorted(in_k(detail::selector(a, {}, {x, y})), near);
    }
  ensure(marks <= par.omega, "clique marking exceeded its budget");
  Vertex victim = -1;
  for (Vertex v : kk)
    if (!marked[v]) {
      victim = v;
      break;
    }
  ensure(victim >= 0, "every clique vertex is marked");
  ReductionEvent e = detail::deletion_event(a, "rule3", {victim});
  e.witness = detail::labels_of(a, kk);
  e.counters = {{"marked", marks}, {"omega", par.omega}};
  detail::remove_vertices(a, {victim});
  return e;
}

inline std::optional<ReductionEvent> rule3_reduce_clique(AChvdInstance& a) {
  const KernelParams par = KernelParams::of(a.k, static_cast<int>(a.modulator.size()));
  Mask body = a.body();
  for (const auto& c : maximal_cliques(a.g, &body))
    if (static_cast<long long>(c.size()) > par.omega) return rule3_reduce_clique(a, c);
  return std::nullopt;
}

// Keeps a few components of G - S per pair of S and deletes one unmarked component.
inline std::optional<ReductionEvent> template_toughness(AChvdInstance& a, const VertexList& s_in,
                                                        const std::string& rule) {
  VertexList s = s_in;
  sort_unique(s);
  if (!is_subset(a.modulator, s)) throw std::invalid_argument("separator must contain the modulator");
  const int n = a.g.size();
  Mask rest(n, 1);
  for (Vertex v : s) rest[v] = 0;
  auto comps = connected_components(a.g, &rest);
  const int c = static_cast<int>(comps.size());
  if (c == 0) return std::nullopt;
  std::vector<int> label(n, -1);
  for (int i = 0; i < c; ++i)
    for (Vertex v : comps[i]) label[v] = i;
  // comps touched by each separator vertex
  std::vector<std::vector<char>> touch(s.size(), std::vector<char>(c, 0));
  for (std::size_t i = 0; i < s.size(); ++i)
    for (Vertex w : a.g.neighbors(s[i]))
      if (label[w] >= 0) touch[i][label[w]] = 1;
  std::vector<char> marked(c, 0);
  int marked_count = 0;
  auto mark = [&](int i) {
    if (!marked[i]) {
      marked[i] = 1;
      ++marked_count;
    }
  };
  for (std::size_t i = 0; i < s.size() && marked_count < c; ++i)
    for (std::size_t j = i + 1; j < s.size() && marked_count < c; ++j) {
      Vertex x = s[i], y = s[j];
      const bool adj = a.g.adjacent(x, y);
      const long long cap = adj ? a.k + 1LL : a.k + 2LL;
      long long got = 0;
      for (int ci = 0; ci < c && got < cap; ++ci) {
        if (!touch[i][ci] || !touch[j][ci]) continue;
        if (adj) {
          // a path from N(x) to N(y) inside C avoiding their common neighbours
          Mask inner(n, 0);
          for (Vertex v : comps[ci]) inner[v] = !(a.g.adjacent(v, x) && a.g.adjacent(v, y));
          bool found = false;
          for (const auto& part : connected_components(a.g, &inner))
            if (detail::touches(a.g, part, x) && detail::touches(a.g, part, y)) {
              found = true;
              break;
            }
          if (!found) continue;
        }
        ++got;
        mark(ci);
      }
    }
  for (int ci = 0; ci < c; ++ci)
    if (!marked[ci]) {
      ReductionEvent e = detail::deletion_event(a, rule, comps[ci]);
      e.note = "template";
      e.witness = detail::labels_of(a, s);
      e.counters = {{"components", c}, {"marked", marked_count}};
      detail::remove_vertices(a, comps[ci]);
      return e;
    }
  return std::nullopt;
}

inline std::optional<ReductionEvent> rule4_components(AChvdInstance& a) {
  const auto& m = a.modulator;
  for (Vertex x : m)
    for (Vertex y : m) {
      Mask gx = detail::not_adjacent_mask(a, x);
      VertexList sep = m;
      for (const auto& comp : connected_components(a.g, &gx))
        if (detail::touches(a.g, comp, y))
          for (Vertex w : neighborhood(a.g, comp)) sep.push_back(w);
      sort_unique(sep);
      if (auto e = template_toughness(a, sep, "rule4")) {
        e->note = "template on S(not x, y)";
        return e;
      }
    }
  const KernelParams par = KernelParams::of(a.k, static_cast<int>(m.size()));
  for (Vertex x : m) {
    Mask gx = detail::not_adjacent_mask(a, x);
    auto comps = connected_components(a.g, &gx);
    const int c = static_cast<int>(comps.size());
    std::vector<char> marked(c, 0);
    Mask body = a.body();
    for (Vertex y : m) {
      if (a.g.adjacent(x, y)) {
        long long got = 0;
        for (int i = 0; i < c && got < a.k + 1LL; ++i) {
          if (!detail::touches(a.g, comps[i], y)) continue;
          bool outside = false;
          for (Vertex w : neighborhood(a.g, comps[i], &body)) outside = outside || !a.g.adjacent(w, y);
          if (!outside) continue;
          marked[i] = 1;
          ++got;
        }
      } else {
        long long got = 0;
        for (int i = 0; i < c && got < par.rule4_budget; ++i)
          if (detail::touches(a.g, comps[i], y)) {
            marked[i] = 1;
            ++got;
          }
      }
    }
    for (std::size_t i = 0; i < m.size(); ++i)
      for (std::size_t j = i + 1; j < m.size(); ++j) {
        if (a.g.adjacent(m[i], m[j])) continue;
        long long got = 0;
        for (int ci = 0; ci < c && got < a.k + 1LL; ++ci)
          if (detail::touches(a.g, comps[ci], m[i]) && detail::touches(a.g, comps[ci], m[j])) {
            marked[ci] = 1;
            ++got;
          }
      }
    for (int i = 0; i < c; ++i)
      if (!marked[i]) {
        ReductionEvent e;
        e.rule = "rule4";
        e.note = "join x to a component of G(not x)";
        e.witness = detail::labels_of(a, {x});
        for (Vertex v : comps[i]) {
          a.g.add_edge(x, v);
          e.added_edges.emplace_back(a.labels[x], a.labels[v]);
        }
        e.counters = {{"components", c}};
        return e;
      }
  }
  return std::nullopt;
}

// Tree nodes Q (closed under lowest common ancestors) and S_Q, the union of their bags.
struct SeparatorSet {
  CliqueTree tree;
  std::vector<int> q0;
  std::vector<int> q;
  VertexList sq;
};

inline SeparatorSet build_SQ(const AChvdInstance& a) {
  SeparatorSet out;
  out.tree = detail::body_tree(a);
  const CliqueTree& t = out.tree;
  if (t.num_nodes() == 0) return out;
  const auto& m = a.modulator;
  Mask body = a.body();
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = i + 1; j < m.size(); ++j) {
      if (a.g.adjacent(m[i], m[j])) continue;
      Mask common = mask_of(a.g.size(), detail::selector(a, {m[i], m[j]}, {}));
      auto r = recognize(a.g, &common);
      ensure(std::holds_alternative<Peo>(r), "G(x,y) is not chordal");
      for (const auto& c : peo_cliques(a.g, std::get<Peo>(r))) {
        auto node = t.node_containing(c);
        ensure(node.has_value(), "clique of G(x,y) not in a bag");
        out.q0.push_back(*node);
      }
    }
  for (Vertex x : m) {
    Mask gx = detail::not_adjacent_mask(a, x);
    for (const auto& comp : connected_components(a.g, &gx)) {
      auto node = t.node_containing(neighborhood(a.g, comp, &body));
      ensure(node.has_value(), "neighbourhood of a G(not x) component is not a clique");
      out.q0.push_back(*node);
    }
  }
  sort_unique(out.q0);
  out.q = out.q0;
  out.q.push_back(t.root());
  for (std::size_t i = 0; i < out.q0.size(); ++i)
    for (std::size_t j = i + 1; j < out.q0.size(); ++j) out.q.push_back(t.lca(out.q0[i], out.q0[j]));
  sort_unique(out.q);
  ensure(out.q.size() <= 1 + 2 * out.q0.size(), "LCA closure is too large");
  for (int p : out.q)
    for (Vertex v : t.bag(p)) out.sq.push_back(v);
  sort_unique(out.sq);
  return out;
}

inline std::optional<ReductionEvent> rule5_sq_template(AChvdInstance& a) {
  SeparatorSet s = build_SQ(a);
  VertexList sep = set_union(s.sq, a.modulator);
  if (auto e = template_toughness(a, sep, "rule5")) {
    e->note = "template on S_Q";
    e->counters.emplace_back("q0", static_cast<long long>(s.q0.size()));
    e->counters.emplace_back("q", static_cast<long long>(s.q.size()));
    return e;
  }
  return std::nullopt;
}

// Path of tree nodes between the two boundary nodes of a component A of G - M - S_Q,
// with the layered node sets and the protected vertex set Z.
struct ComponentContext {
  static constexpr int kDummy = -2;
  VertexList a;
  int q_up = -1;
  int q_down = -1;  // kDummy when A has a single boundary node
  std::vector<int> pi;
  std::vector<std::vector<int>> layers;  // positions on pi for Q_0, Q_1, Q_2
  std::vector<VertexList> z_layers;      // Z_0, Z_1, Z_2
  std::vector<int> r_edges;              // position e stands for (pi[e], pi[e+1])
  VertexList z;
  bool used_component_boundary = false;  // fell back to the boundary of T - Q

  const VertexList& bag_at(const CliqueTree& t, int pos) const {
    static const VertexList empty;
    return pi.at(pos) == kDummy ? empty : t.bag(pi[pos]);
  }
};

inline ComponentContext component_context(const AChvdInstance& a, const SeparatorSet& s, const VertexList& comp) {
  const CliqueTree& t = s.tree;
  ComponentContext ctx;
  ctx.a = comp;
  const int nn = t.num_nodes();
  std::vector<char> in_qa(nn, 0), in_q(nn, 0);
  for (int p : s.q) in_q[p] = 1;
  std::vector<int> qa;
  for (Vertex v : comp)
    for (int p : t.nodes_of(v)) qa.push_back(p);
  sort_unique(qa);
  ensure(!qa.empty(), "component outside the clique tree");
  for (int p : qa) {
    in_qa[p] = 1;
    ensure(!in_q[p], "component meets a bag of Q");
  }
  int top = qa.front();
  for (int p : qa)
    if (t.depth(p) < t.depth(top)) top = p;
  ensure(t.parent(top) >= 0, "component reaches the root bag");

  std::vector<int> others;
  for (int p : qa)
    for (int q : t.tree_neighbors(p))
      if (!in_qa[q] && q != t.parent(top) && !t.adhesion(p, q).empty()) others.push_back(q);
  sort_unique(others);
  ctx.q_up = t.parent(top);
  int attach = -1;
  if (others.size() <= 1) {
    ctx.q_down = others.empty() ? ComponentContext::kDummy : others.front();
  } else {
    // boundary of the component of T - Q that holds Q^A
    ctx.used_component_boundary = true;
    std::vector<char> in_tc(nn, 0);
    std::vector<int> stack(qa.begin(), qa.end());
    for (int p : qa) in_tc[p] = 1;
    while (!stack.empty()) {
      int p = stack.back();
      stack.pop_back();
      for (int q : t.tree_neighbors(p))
        if (!in_tc[q] && !in_q[q]) {
          in_tc[q] = 1;
          stack.push_back(q);
        }
    }
    int tc_top = top;
    for (int p = 0; p < nn; ++p)
      if (in_tc[p] && t.depth(p) < t.depth(tc_top)) tc_top = p;
    ctx.q_up = t.parent(tc_top);
    std::vector<int> lower;
    for (int p = 0; p < nn; ++p)
      if (in_tc[p])
        for (int q : t.children(p))
          if (!in_tc[q]) lower.push_back(q);
    sort_unique(lower);
    ensure(lower.size() <= 1, "component touches more than two boundary nodes of Q");
    ctx.q_down = lower.empty() ? ComponentContext::kDummy : lower.front();
    if (lower.empty()) {
      qa.clear();
      for (int p = 0; p < nn; ++p)
        if (in_tc[p]) qa.push_back(p);
      std::fill(in_qa.begin(), in_qa.end(), 0);
      for (int p : qa) in_qa[p] = 1;
    }
  }
  if (ctx.q_down == ComponentContext::kDummy) {
    for (int p : qa) {
      bool leaf = true;
      for (int c : t.children(p)) leaf = leaf && !in_qa[c];
      if (leaf) {
        attach = p;
        break;
      }
    }
    ctx.pi = t.tree_path(ctx.q_up, attach);
    ctx.pi.push_back(ComponentContext::kDummy);
  } else {
    ctx.pi = t.tree_path(ctx.q_up, ctx.q_down);
  }

  Mask body = a.body();
  VertexList nbr = neighborhood(a.g, comp, &body);
  VertexList ends = set_union(ctx.bag_at(t, 0), ctx.bag_at(t, static_cast<int>(ctx.pi.size()) - 1));
  ensure(is_subset(nbr, ends), "component neighbourhood escapes the boundary bags");
  {
    VertexList mn0 = set_intersection(a.g.neighbors(comp.front()), a.modulator);
    for (Vertex v : comp) ensure(set_intersection(a.g.neighbors(v), a.modulator) == mn0, "component is not uniform on M");
  }

  const int len = static_cast<int>(ctx.pi.size());
  std::vector<int> q{0, len - 1};
  sort_unique(q);
  for (int layer = 0; layer < 3; ++layer) {
    ctx.layers.push_back(q);
    VertexList z;
    for (int pos : q) z = set_union(z, ctx.bag_at(t, pos));
    ctx.z_layers.push_back(z);
    if (layer == 2) break;
    std::vector<int> next = q;
    for (Vertex u : z) {
      int lo = -1, hi = -1;
      for (int pos = 0; pos < len; ++pos)
        if (contains_sorted(ctx.bag_at(t, pos), u)) {
          if (lo < 0) lo = pos;
          hi = pos;
        }
      if (lo >= 0) {
        next.push_back(lo);
        next.push_back(hi);
      }
    }
    sort_unique(next);
    ensure(next.size() <= q.size() + 2 * z.size(), "layer grew beyond its budget");
    q = next;
  }
  const auto& q2 = ctx.layers[2];
  VertexList z = ctx.z_layers[2];
  for (std::size_t i = 0; i + 1 < q2.size(); ++i) {
    int best = -1;
    std::size_t best_size = 0;
    for (int e = q2[i]; e < q2[i + 1]; ++e) {
      std::size_t sz = set_intersection(set_intersection(ctx.bag_at(t, e), ctx.bag_at(t, e + 1)), comp).size();
      if (best < 0 || sz < best_size) {
        best = e;
        best_size = sz;
      }
    }
    ctx.r_edges.push_back(best);
    z = set_union(z, set_intersection(ctx.bag_at(t, best), ctx.bag_at(t, best + 1)));
  }
  ctx.z = set_intersection(z, comp);
  const KernelParams par = KernelParams::of(a.k, static_cast<int>(a.modulator.size()));
  ensure(static_cast<long long>(ctx.z.size()) <= par.z_ceiling(), "|Z| exceeds its ceiling");
  return ctx;
}

namespace detail {

inline std::vector<VertexList> sq_components(const AChvdInstance& a, const SeparatorSet& s) {
  Mask rest = a.body();
  for (Vertex v : s.sq) rest[v] = 0;
  return connected_components(a.g, &rest);
}

}  // namespace detail

inline std::optional<ReductionEvent> rule6_irrelevant(AChvdInstance& a) {
  SeparatorSet s = build_SQ(a);
  for (const auto& comp : detail::sq_components(a, s)) {
    ComponentContext ctx = component_context(a, s, comp);
    VertexList seen;
    for (int pos = 0; pos < static_cast<int>(ctx.pi.size()); ++pos) seen = set_union(seen, ctx.bag_at(s.tree, pos));
    VertexList outside = set_difference(comp, seen);
    if (!outside.empty()) {
      ReductionEvent e = detail::deletion_event(a, "rule6", {outside.front()});
      e.witness = detail::labels_of(a, comp);
      e.counters = {{"path_nodes", static_cast<long long>(ctx.pi.size())}};
      detail::remove_vertices(a, {outside.front()});
      return e;
    }
  }
  return std::nullopt;
}

inline std::optional<ReductionEvent> rule7_bypass(AChvdInstance& a) {
  SeparatorSet s = build_SQ(a);
  for (const auto& comp : detail::sq_components(a, s)) {
    ComponentContext ctx = component_context(a, s, comp);
    VertexList free = set_difference(comp, ctx.z);
    if (free.empty()) continue;
    Vertex v = free.front();
    ReductionEvent e = detail::deletion_event(a, "rule7", {v});
    e.witness = detail::labels_of(a, comp);
    e.counters = {{"z", static_cast<long long>(ctx.z.size())}};
    const VertexList nb = a.g.neighbors(v);
    for (std::size_t i = 0; i < nb.size(); ++i)
      for (std::size_t j = i + 1; j < nb.size(); ++j)
        if (!a.g.adjacent(nb[i], nb[j])) {
          ensure(!(a.in_modulator(nb[i]) && a.in_modulator(nb[j])), "bypass would join two modulator vertices");
          a.g.add_edge(nb[i], nb[j]);
          e.added_edges.emplace_back(a.labels[nb[i]], a.labels[nb[j]]);
        }
    detail::remove_vertices(a, {v});
    return e;
  }
  return std::nullopt;
}

struct AnnotateResult {
  bool no_instance = false;
  AChvdInstance instance;
  std::vector<ReductionEvent> events;
};

// Grows M0 into a tidy modulator, deleting centres of flowers larger than k.
inline AnnotateResult annotate(const Graph& g, int k, const VertexList& m0) {
  AnnotateResult r;
  r.instance = AChvdInstance::make(g, k, m0);
  AChvdInstance& a = r.instance;
  {
    Mask body = a.body();
    if (!is_chordal(a.g, &body)) throw std::invalid_argument("G - M0 is not chordal");
  }
  if (k < 0) {
    r.no_instance = true;
    return r;
  }
  VertexList extra;
  bool restart = true;
  while (restart) {
    restart = false;
    extra.clear();
    for (Vertex v : a.modulator) {
      VertexList keep;
      for (Vertex u = 0; u < a.g.size(); ++u)
        if (u == v || !a.in_modulator(u)) keep.push_back(u);
      Subgraph sub = induced_subgraph(a.g, keep);
      FlowerCover fc = flower_and_cover(sub.graph, sub.from_parent[v]);
      if (fc.flower.order() > a.k) {
        ReductionEvent e = detail::deletion_event(a, "annotate", {v});
        e.note = "flower larger than k";
        e.k_delta = -1;
        e.counters = {{"flower_order", fc.flower.order()}};
        r.events.push_back(e);
        detail::remove_vertices(a, {v});
        --a.k;
        if (a.k < 0) {
          r.no_instance = true;
          return r;
        }
        restart = true;
        break;
      }
      for (Vertex u : sub.lift(fc.cover)) extra.push_back(u);
    }
  }
  sort_unique(extra);
  VertexList added = set_difference(extra, a.modulator);
  if (!added.empty()) {
    ReductionEvent e;
    e.rule = "annotate";
    e.note = "extend modulator";
    e.modulator_added = detail::labels_of(a, added);
    r.events.push_back(e);
  }
  a.modulator = set_union(a.modulator, added);
  return r;
}

struct KernelOptions {
  bool check_invariants = true;
  std::function<void(const AChvdInstance& before, const AChvdInstance& after, const ReductionEvent&)> observer;
};

struct AnnotatedKernel {
  AChvdInstance instance;
  ReductionTrace trace;
  bool trivial_yes = false;
  bool trivial_no = false;
};

inline AChvdInstance canonical_yes_annotated() { return AChvdInstance::make(Graph(1), 0, {}); }

inline AChvdInstance canonical_no_annotated() {
  Graph c4(4);
  for (int i = 0; i < 4; ++i) c4.add_edge(i, (i + 1) % 4);
  return AChvdInstance::make(c4, 0, {0, 1});
}

// Structural quantities of a reduced instance next to their ceilings.
struct StructuralReport {
  long long omega = 0, omega_bound = 0;
  long long max_components = 0, component_bound = 0;
  long long max_z = 0, z_bound = 0;
  long long sq_size = 0;
  bool ok() const { return omega <= omega_bound && max_components <= component_bound && max_z <= z_bound; }
};

inline StructuralReport structural_report(const AChvdInstance& a) {
  StructuralReport r;
  KernelParams par = KernelParams::of(a.k, static_cast<int>(a.modulator.size()));
  Mask body = a.body();
  r.omega = clique_number(a.g, &body);
  r.omega_bound = par.omega;
  r.component_bound = par.component_ceiling;
  for (Vertex x : a.modulator) {
    Mask gx = detail::not_adjacent_mask(a, x);
    r.max_components = std::max<long long>(r.max_components, connected_components(a.g, &gx).size());
  }
  r.z_bound = par.z_ceiling();
  SeparatorSet s = build_SQ(a);
  r.sq_size = static_cast<long long>(set_union(s.sq, a.modulator).size());
  for (const auto& comp : detail::sq_components(a, s))
    r.max_z = std::max<long long>(r.max_z, component_context(a, s, comp).z.size());
  return r;
}

// Applies the lowest-numbered applicable rule until none applies.
inline AnnotatedKernel kernelize_annotated(AChvdInstance a, const KernelOptions& opt = {}) {
  AnnotatedKernel out;
  if (opt.check_invariants) validate_instance(a);
  const long long n0 = a.g.size();
  const long long cap = n0 + n0 * (n0 - 1) / 2 + static_cast<long long>(a.modulator.size() * a.modulator.size()) + 1;
  using Rule = std::optional<ReductionEvent> (*)(AChvdInstance&);
  const Rule rules[] = {rule1_common_neighbours, +[](AChvdInstance& x) { return rule2_xy_good(x); },
                        +[](AChvdInstance& x) { return rule3_reduce_clique(x); }, rule4_components,
                        rule5_sq_template, rule6_irrelevant, rule7_bypass};
  long long fired = 0;
  while (true) {
    if (a.k < 0) {
      ReductionEvent e;
      e.rule = "trivial_no";
      out.trace.events.push_back(e);
      a = canonical_no_annotated();
      out.trivial_no = true;
      break;
    }
    if (a.k >= static_cast<int>(a.modulator.size())) {
      ReductionEvent e;
      e.rule = "trivial_yes";
      out.trace.events.push_back(e);
      a = canonical_yes_annotated();
      out.trivial_yes = true;
      break;
    }
    std::optional<AChvdInstance> before;
    if (opt.observer) before = a;
    std::optional<ReductionEvent> ev;
    for (Rule r : rules)
      if ((ev = r(a))) break;
    if (!ev) break;
    ensure(++fired <= cap, "reduction rules did not converge");
    if (opt.check_invariants) validate_instance(a);
    if (opt.observer) opt.observer(*before, a, *ev);
    out.trace.events.push_back(std::move(*ev));
  }
  if (opt.check_invariants && !out.trivial_yes && !out.trivial_no) {
    StructuralReport rep = structural_report(a);
    ensure(rep.omega <= rep.omega_bound, "reduced instance has a clique above the bound");
    ensure(rep.max_z <= rep.z_bound, "reduced instance has |Z| above the bound");
  }
  out.instance = std::move(a);
  return out;
}

struct PlainInstance {
  Graph g;
  int k = 0;
  std::vector<int> labels;
  bool operator==(const PlainInstance&) const = default;
};

// Replaces each forced pair xy by a path x - x' - y' - y.
inline PlainInstance gadgetize(const AChvdInstance& a, int first_new_label, ReductionEvent* event = nullptr) {
  PlainInstance p{a.g, a.k, a.labels};
  ReductionEvent e;
  e.rule = "gadget";
  int next = first_new_label;
  for (auto [x, y] : a.forced) {
    Vertex x1 = p.g.add_vertex(), y1 = p.g.add_vertex();
    p.labels.push_back(next++);
    p.labels.push_back(next++);
    p.g.add_edge(x, x1);
    p.g.add_edge(x1, y1);
    p.g.add_edge(y1, y);
    e.added_vertices.push_back(p.labels[x1]);
    e.added_vertices.push_back(p.labels[y1]);
    e.added_edges.emplace_back(p.labels[x], p.labels[x1]);
    e.added_edges.emplace_back(p.labels[x1], p.labels[y1]);
    e.added_edges.emplace_back(p.labels[y1], p.labels[y]);
  }
  if (event) *event = e;
  return p;
}

inline PlainInstance canonical_yes() { return {Graph(1), 0, {-1}}; }

inline PlainInstance canonical_no() {
  Graph c4(4);
  for (int i = 0; i < 4; ++i) c4.add_edge(i, (i + 1) % 4);
  return {c4, 0, {-1, -1, -1, -1}};
}

struct KernelResult {
  bool no_instance = false;
  bool trivial_yes = false;
  PlainInstance kernel;
  AChvdInstance annotated;  // reduced annotated instance before gadgets
  ReductionTrace trace;
};

// Full pipeline: annotate, reduce, replace forced pairs by gadgets.
inline KernelResult kernelize(const Graph& g, int k, const VertexList& m0, const KernelOptions& opt = {}) {
  KernelResult r;
  auto ann = annotate(g, k, m0);
  r.trace.events = ann.events;
  if (ann.no_instance) {
    ReductionEvent e;
    e.rule = "trivial_no";
    r.trace.events.push_back(e);
    r.no_instance = true;
    r.kernel = canonical_no();
    return r;
  }
  auto red = kernelize_annotated(std::move(ann.instance), opt);
  r.trace.events.insert(r.trace.events.end(), red.trace.events.begin(), red.trace.events.end());
  r.annotated = red.instance;
  if (red.trivial_no) {
    r.no_instance = true;
    r.kernel = canonical_no();
    return r;
  }
  if (red.trivial_yes) {
    r.trivial_yes = true;
    r.kernel = canonical_yes();
    return r;
  }
  ReductionEvent ge;
  r.kernel = gadgetize(red.instance, g.size(), &ge);
  r.trace.events.push_back(ge);
  return r;
}

// Re-applies a trace to the original instance; must reproduce the kernel.
inline PlainInstance replay(const Graph& g, int k, const ReductionTrace& trace) {
  PlainInstance p{g, k, {}};
  p.labels.resize(g.size());
  std::iota(p.labels.begin(), p.labels.end(), 0);
  auto index_of = [&](int label) {
    auto it = std::find(p.labels.begin(), p.labels.end(), label);
    if (it == p.labels.end()) throw std::invalid_argument("trace refers to unknown label " + std::to_string(label));
    return static_cast<Vertex>(it - p.labels.begin());
  };
  for (const auto& e : trace.events) {
    if (e.rule == "trivial_yes") {
      p = canonical_yes();
      continue;
    }
    if (e.rule == "trivial_no") {
      p = canonical_no();
      continue;
    }
    for (int lab : e.added_vertices) {
      p.g.add_vertex();
      p.labels.push_back(lab);
    }
    for (auto [u, v] : e.added_edges) p.g.add_edge(index_of(u), index_of(v));
    for (auto [u, v] : e.forced) p.g.add_edge(index_of(u), index_of(v));
    if (!e.deleted.empty()) {
      VertexList del;
      for (int lab : e.deleted) del.push_back(index_of(lab));
      Subgraph s = remove_vertices(p.g, del);
      std::vector<int> labels;
      for (Vertex v : s.to_parent) labels.push_back(p.labels[v]);
      p.g = std::move(s.graph);
      p.labels = std::move(labels);
    }
    p.k += e.k_delta;
  }
  return p;
}

}  // namespace chvd

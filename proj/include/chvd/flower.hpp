#pragma once

#include "chordal.hpp"

namespace chvd {

// Holes through a common center that pairwise meet only in the center.
struct Flower {
  Vertex center = -1;
  std::vector<VertexList> paths;  // petal i is the hole center + paths[i]

  int order() const { return static_cast<int>(paths.size()); }

  VertexList vertices() const {
    VertexList out{center};
    for (const auto& p : paths) out.insert(out.end(), p.begin(), p.end());
    sort_unique(out);
    return out;
  }

  Hole petal(int i) const {
    Hole h;
    h.cycle.push_back(center);
    h.cycle.insert(h.cycle.end(), paths.at(i).begin(), paths.at(i).end());
    return h;
  }
};

inline bool is_valid_flower(const Graph& g, const Flower& f, std::string* why = nullptr) {
  auto fail = [&](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  if (f.center < 0 || f.center >= g.size()) return fail("center out of range");
  Mask used(g.size(), 0);
  for (int i = 0; i < f.order(); ++i) {
    if (!verify_hole(g, f.petal(i))) return fail("petal " + std::to_string(i) + " is not a hole");
    for (Vertex u : f.paths[i]) {
      if (used[u]) return fail("petals share vertex " + std::to_string(u));
      used[u] = 1;
    }
  }
  return true;
}

namespace detail {

struct PathSearch {
  const Graph& g;
  const Mask& allowed;
  Vertex t1, s2, t2;
  long long budget;
  VertexList path;
  Mask on_path;
  std::vector<int> touch;  // number of path vertices adjacent to each vertex
  VertexList other;

  PathSearch(const Graph& g_, const Mask& allowed_, Vertex t1_, Vertex s2_, Vertex t2_, long long budget_)
      : g(g_), allowed(allowed_), t1(t1_), s2(s2_), t2(t2_), budget(budget_), on_path(g_.size(), 0),
        touch(g_.size(), 0) {}

  void push(Vertex w) {
    path.push_back(w);
    on_path[w] = 1;
    for (Vertex x : g.neighbors(w)) ++touch[x];
  }
  void pop() {
    Vertex w = path.back();
    path.pop_back();
    on_path[w] = 0;
    for (Vertex x : g.neighbors(w)) --touch[x];
  }

  // Can the path still be extended from its end to t1 as an induced path?
  bool t1_reachable() const {
    Vertex e = path.back();
    if (e == t1) return true;
    std::vector<char> seen(g.size(), 0);
    std::vector<Vertex> stack{e};
    seen[e] = 1;
    while (!stack.empty()) {
      Vertex u = stack.back();
      stack.pop_back();
      for (Vertex x : g.neighbors(u)) {
        if (seen[x] || on_path[x] || !allowed[x] || x == s2 || x == t2) continue;
        if (touch[x] - (g.adjacent(x, e) ? 1 : 0) != 0) continue;
        if (x == t1) return true;
        seen[x] = 1;
        stack.push_back(x);
      }
    }
    return false;
  }

  std::optional<VertexList> second_path() const {
    Mask rest = allowed;
    for (Vertex v : path) rest[v] = 0;
    return bfs_path(g, s2, t2, rest);
  }

  bool dfs() {
    if (--budget < 0) throw std::runtime_error("two-disjoint-paths search budget exhausted");
    Vertex e = path.back();
    if (e == t1) {
      if (auto p = second_path()) {
        other = *p;
        return true;
      }
      return false;
    }
    if (!second_path() || !t1_reachable()) return false;
    for (Vertex w : g.neighbors(e)) {
      if (on_path[w] || !allowed[w] || w == s2 || w == t2) continue;
      if (touch[w] != 1) continue;  // w may only see the current end
      push(w);
      if (dfs()) return true;
      pop();
    }
    return false;
  }
};

// Vertex-disjoint s1-t1 and s2-t2 paths inside the allowed set, both induced.
inline std::optional<std::pair<VertexList, VertexList>> two_disjoint_paths(const Graph& g, const Mask& allowed,
                                                                           Vertex s1, Vertex t1, Vertex s2,
                                                                           Vertex t2) {
  Mask a = allowed;
  a[s2] = a[t2] = 0;
  if (auto p1 = bfs_path(g, s1, t1, a)) {
    Mask b = allowed;
    for (Vertex v : *p1) b[v] = 0;
    if (auto p2 = bfs_path(g, s2, t2, b)) return std::make_pair(*p1, *p2);
  }
  a = allowed;
  a[s1] = a[t1] = 0;
  if (auto p2 = bfs_path(g, s2, t2, a)) {
    Mask b = allowed;
    for (Vertex v : *p2) b[v] = 0;
    if (auto p1 = bfs_path(g, s1, t1, b)) return std::make_pair(*p1, *p2);
  }
  PathSearch ps(g, allowed, t1, s2, t2, 5'000'000);
  ps.push(s1);
  if (ps.dfs()) return std::make_pair(ps.path, ps.other);
  return std::nullopt;
}

}  // namespace detail

// A flower of order two centred at v in G minus the excluded vertices.
inline std::optional<Flower> two_flower(const Graph& g, Vertex v, const Mask* excluded = nullptr) {
  auto out = [&](Vertex u) { return excluded && (*excluded)[u]; };
  if (out(v)) throw std::invalid_argument("center is excluded");
  VertexList nb;
  for (Vertex u : g.neighbors(v))
    if (!out(u)) nb.push_back(u);
  Mask base(g.size(), 0);
  for (Vertex u = 0; u < g.size(); ++u) base[u] = !out(u);
  base[v] = 0;
  for (Vertex u : nb) base[u] = 0;
  std::vector<int> label = component_labels(g, &base);
  // components of G - N[v] touched by each neighbour
  std::vector<VertexList> touched(g.size());
  for (Vertex u : nb) {
    for (Vertex w : g.neighbors(u))
      if (base[w]) touched[u].push_back(label[w]);
    sort_unique(touched[u]);
  }
  auto may_join = [&](Vertex a, Vertex b) { return !set_intersection(touched[a], touched[b]).empty(); };
  std::vector<std::pair<Vertex, Vertex>> pairs;
  for (std::size_t i = 0; i < nb.size(); ++i)
    for (std::size_t j = i + 1; j < nb.size(); ++j)
      if (!g.adjacent(nb[i], nb[j]) && may_join(nb[i], nb[j])) pairs.emplace_back(nb[i], nb[j]);
  for (std::size_t i = 0; i < pairs.size(); ++i)
    for (std::size_t j = i + 1; j < pairs.size(); ++j) {
      auto [s1, t1] = pairs[i];
      auto [s2, t2] = pairs[j];
      if (s1 == s2 || s1 == t2 || t1 == s2 || t1 == t2) continue;
      Mask allowed = base;
      allowed[s1] = allowed[t1] = allowed[s2] = allowed[t2] = 1;
      if (auto r = detail::two_disjoint_paths(g, allowed, s1, t1, s2, t2)) {
        Flower f;
        f.center = v;
        f.paths = {r->first, r->second};
        return f;
      }
    }
  return std::nullopt;
}

// One improvement step (I, II or III in that order) or nullopt if the flower is stable.
// The clique tree must belong to G - v.
inline std::optional<Flower> improve(const Graph& g, const CliqueTree& t, const Flower& f) {
  const Vertex v = f.center;
  const VertexList fv = f.vertices();
  const Mask in_flower = mask_of(g.size(), fv);

  // Step I: a new petal disjoint from the flower.
  {
    VertexList cand;
    for (Vertex u : g.neighbors(v))
      if (!in_flower[u]) cand.push_back(u);
    Mask allowed(g.size(), 1);
    for (Vertex u : fv) allowed[u] = 0;
    for (Vertex u : g.neighbors(v)) allowed[u] = 0;
    for (std::size_t i = 0; i < cand.size(); ++i)
      for (std::size_t j = i + 1; j < cand.size(); ++j) {
        if (g.adjacent(cand[i], cand[j])) continue;
        allowed[cand[i]] = allowed[cand[j]] = 1;
        auto p = bfs_path(g, cand[i], cand[j], allowed);
        allowed[cand[i]] = allowed[cand[j]] = 0;
        if (p) {
          Flower nf = f;
          nf.paths.push_back(*p);
          return nf;
        }
      }
  }

  // Step II: split a petal into two.
  for (int i = 0; i < f.order(); ++i) {
    Mask excluded = in_flower;
    excluded[v] = 0;
    for (Vertex u : f.paths[i]) excluded[u] = 0;
    if (auto two = two_flower(g, v, &excluded)) {
      Flower nf = f;
      nf.paths[i] = two->paths[0];
      nf.paths.push_back(two->paths[1]);
      return nf;
    }
  }

  // Step III: move a petal endpoint closer in the clique tree.
  for (int i = 0; i < f.order(); ++i) {
    const VertexList& p = f.paths[i];
    for (int side = 0; side < 2; ++side) {
      Vertex s = side == 0 ? p.front() : p.back();
      Vertex tt = side == 0 ? p.back() : p.front();
      int base_dist = t.subtree_distance(s, tt);
      for (Vertex t2 : g.neighbors(v)) {
        if (in_flower[t2] || g.adjacent(s, t2)) continue;
        if (t.subtree_distance(s, t2) >= base_dist) continue;
        Mask allowed(g.size(), 1);
        for (Vertex u : fv) allowed[u] = 0;
        for (Vertex u : p) allowed[u] = 1;
        allowed[v] = 0;
        for (Vertex u : g.neighbors(v)) allowed[u] = 0;
        allowed[s] = allowed[t2] = 1;
        if (auto np = bfs_path(g, s, t2, allowed)) {
          Flower nf = f;
          nf.paths[i] = *np;
          return nf;
        }
      }
    }
  }
  return std::nullopt;
}

struct Cutpoints {
  std::vector<int> edge;              // child node of the tree edge, -1 for none
  std::vector<VertexList> adhesion;   // adhesion of that edge
};

// First edge on the way from top(u) to the root whose adhesion lies in N(v) or the flower.
inline Cutpoints cutpoints(const Graph& g, const CliqueTree& t, const Flower& f) {
  Cutpoints cp;
  cp.edge.assign(g.size(), -1);
  cp.adhesion.assign(g.size(), {});
  VertexList allowed_set = set_union(g.neighbors(f.center), f.vertices());
  for (Vertex u = 0; u < g.size(); ++u) {
    if (!t.covers(u)) continue;
    for (auto p = t.top(u); t.parent(p) >= 0; p = t.parent(p)) {
      auto adh = t.adhesion(p, t.parent(p));
      if (is_subset(adh, allowed_set)) {
        cp.edge[u] = p;
        cp.adhesion[u] = std::move(adh);
        break;
      }
    }
  }
  return cp;
}

inline VertexList hitting_set(const Graph& g, const Flower& f, const Cutpoints& cp) {
  VertexList s;
  for (const auto& p : f.paths) {
    s.push_back(p.front());
    s.push_back(p.back());
  }
  const Mask in_flower = mask_of(g.size(), f.vertices());
  for (Vertex u : g.neighbors(f.center)) {
    if (in_flower[u] || cp.edge[u] < 0) continue;
    for (Vertex w : set_difference(cp.adhesion[u], g.neighbors(f.center))) s.push_back(w);
  }
  sort_unique(s);
  return s;
}

struct FlowerCover {
  Flower flower;
  VertexList cover;
  long long iterations = 0;
};

// Maximal flower at v together with a hole cover of size at most 12 times its order.
inline FlowerCover flower_and_cover(const Graph& g, Vertex v) {
  if (v < 0 || v >= g.size()) throw std::out_of_range("center out of range");
  Mask rest = full_mask(g.size());
  rest[v] = 0;
  auto r = recognize(g, &rest);
  if (!std::holds_alternative<Peo>(r)) throw std::invalid_argument("G - v is not chordal");
  CliqueTree t = build_clique_tree(g, std::get<Peo>(r));
  FlowerCover out;
  out.flower.center = v;
  const long long n = g.size();
  const long long cap = std::max<long long>(16, n * n * n * n);
  while (auto nf = improve(g, t, out.flower)) {
    out.flower = std::move(*nf);
    if (++out.iterations > cap) throw InvariantError("flower improvement exceeded |V|^4 iterations");
  }
  auto cp = cutpoints(g, t, out.flower);
  out.cover = hitting_set(g, out.flower, cp);

  std::string why;
  ensure(is_valid_flower(g, out.flower, &why), "flower invalid: " + why);
  VertexList allowed = set_difference(out.flower.vertices(), {v});
  ensure(is_subset(out.cover, allowed), "cover leaves the flower");
  ensure(static_cast<long long>(out.cover.size()) <= 12LL * out.flower.order(), "cover exceeds 12 * order");
  Mask keep = full_mask(g.size());
  for (Vertex u : out.cover) keep[u] = 0;
  ensure(is_chordal(g, &keep), "cover does not hit every hole");
  return out;
}

}  // namespace chvd

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace chvd {

using Vertex = int;
using VertexList = std::vector<Vertex>;
using Edge = std::pair<Vertex, Vertex>;
using Mask = std::vector<char>;

// Raised when an internal guarantee fails; the CLI maps it to exit code 3.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline void ensure(bool cond, const std::string& what) {
  if (!cond) throw InvariantError(what);
}

inline void sort_unique(VertexList& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

inline bool contains_sorted(const VertexList& v, Vertex x) {
  return std::binary_search(v.begin(), v.end(), x);
}

inline VertexList set_union(const VertexList& a, const VertexList& b) {
  VertexList out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline VertexList set_intersection(const VertexList& a, const VertexList& b) {
  VertexList out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline VertexList set_difference(const VertexList& a, const VertexList& b) {
  VertexList out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline bool is_subset(const VertexList& a, const VertexList& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline Edge make_edge(Vertex u, Vertex v) { return u < v ? Edge{u, v} : Edge{v, u}; }

class Graph {
 public:
  Graph() = default;
  explicit Graph(int n) : adj_(n < 0 ? 0 : n) {
    if (n < 0) throw std::invalid_argument("negative vertex count");
  }

  int size() const { return static_cast<int>(adj_.size()); }
  int num_edges() const { return edges_; }

  Vertex add_vertex() {
    adj_.emplace_back();
    return size() - 1;
  }

  // Returns false if the edge was already present.
  bool add_edge(Vertex u, Vertex v) {
    check(u);
    check(v);
    if (u == v) throw std::invalid_argument("self-loop on vertex " + std::to_string(u));
    auto& a = adj_[u];
    auto it = std::lower_bound(a.begin(), a.end(), v);
    if (it != a.end() && *it == v) return false;
    a.insert(it, v);
    auto& b = adj_[v];
    b.insert(std::lower_bound(b.begin(), b.end(), u), u);
    ++edges_;
    return true;
  }

  bool remove_edge(Vertex u, Vertex v) {
    check(u);
    check(v);
    auto& a = adj_[u];
    auto it = std::lower_bound(a.begin(), a.end(), v);
    if (it == a.end() || *it != v) return false;
    a.erase(it);
    auto& b = adj_[v];
    b.erase(std::lower_bound(b.begin(), b.end(), u));
    --edges_;
    return true;
  }

  bool adjacent(Vertex u, Vertex v) const {
    check(u);
    check(v);
    return contains_sorted(adj_[u], v);
  }

  const VertexList& neighbors(Vertex v) const {
    check(v);
    return adj_[v];
  }

  int degree(Vertex v) const { return static_cast<int>(neighbors(v).size()); }

  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(edges_);
    for (Vertex u = 0; u < size(); ++u)
      for (Vertex v : adj_[u])
        if (u < v) out.emplace_back(u, v);
    return out;
  }

  bool operator==(const Graph& o) const { return adj_ == o.adj_; }

 private:
  void check(Vertex v) const {
    if (v < 0 || v >= size())
      throw std::out_of_range("vertex " + std::to_string(v) + " out of range [0," +
                              std::to_string(size()) + ")");
  }

  std::vector<VertexList> adj_;
  int edges_ = 0;
};

inline Mask full_mask(int n) { return Mask(n, 1); }

inline Mask mask_of(int n, const VertexList& s) {
  Mask m(n, 0);
  for (Vertex v : s) {
    if (v < 0 || v >= n) throw std::out_of_range("vertex " + std::to_string(v) + " out of range");
    m[v] = 1;
  }
  return m;
}

inline VertexList members(const Mask& m) {
  VertexList out;
  for (int i = 0; i < static_cast<int>(m.size()); ++i)
    if (m[i]) out.push_back(i);
  return out;
}

inline bool alive_at(const Mask* alive, Vertex v) { return !alive || (*alive)[v]; }

struct Subgraph {
  Graph graph;
  VertexList to_parent;           // new id -> parent id
  std::vector<int> from_parent;   // parent id -> new id or -1

  VertexList lift(const VertexList& s) const {
    VertexList out;
    out.reserve(s.size());
    for (Vertex v : s) out.push_back(to_parent.at(v));
    sort_unique(out);
    return out;
  }
  VertexList lower(const VertexList& s) const {
    VertexList out;
    for (Vertex v : s) {
      int w = from_parent.at(v);
      if (w >= 0) out.push_back(w);
    }
    sort_unique(out);
    return out;
  }
};

// Vertices keep their relative order; ids are compacted.
inline Subgraph induced_subgraph(const Graph& g, const VertexList& keep) {
  Subgraph s;
  s.from_parent.assign(g.size(), -1);
  VertexList sorted = keep;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("duplicate vertex in induced_subgraph");
  for (Vertex v : sorted) {
    if (v < 0 || v >= g.size()) throw std::out_of_range("vertex " + std::to_string(v) + " out of range");
    s.from_parent[v] = static_cast<int>(s.to_parent.size());
    s.to_parent.push_back(v);
  }
  s.graph = Graph(static_cast<int>(sorted.size()));
  for (Vertex v : sorted)
    for (Vertex w : g.neighbors(v))
      if (v < w && s.from_parent[w] >= 0) s.graph.add_edge(s.from_parent[v], s.from_parent[w]);
  return s;
}

inline Subgraph induced_subgraph(const Graph& g, const Mask& keep) { return induced_subgraph(g, members(keep)); }

inline Subgraph remove_vertices(const Graph& g, const VertexList& removed) {
  Mask keep = full_mask(g.size());
  for (Vertex v : removed) {
    if (v < 0 || v >= g.size()) throw std::out_of_range("vertex " + std::to_string(v) + " out of range");
    keep[v] = 0;
  }
  return induced_subgraph(g, keep);
}

// Components sorted by smallest vertex, each sorted.
inline std::vector<VertexList> connected_components(const Graph& g, const Mask* alive = nullptr) {
  std::vector<VertexList> comps;
  std::vector<char> seen(g.size(), 0);
  for (Vertex s = 0; s < g.size(); ++s) {
    if (seen[s] || !alive_at(alive, s)) continue;
    VertexList comp{s};
    seen[s] = 1;
    for (std::size_t i = 0; i < comp.size(); ++i)
      for (Vertex w : g.neighbors(comp[i]))
        if (!seen[w] && alive_at(alive, w)) {
          seen[w] = 1;
          comp.push_back(w);
        }
    std::sort(comp.begin(), comp.end());
    comps.push_back(std::move(comp));
  }
  return comps;
}

// Component label per vertex (-1 for dead vertices); labels follow connected_components order.
inline std::vector<int> component_labels(const Graph& g, const Mask* alive, int* count = nullptr) {
  std::vector<int> label(g.size(), -1);
  auto comps = connected_components(g, alive);
  for (int c = 0; c < static_cast<int>(comps.size()); ++c)
    for (Vertex v : comps[c]) label[v] = c;
  if (count) *count = static_cast<int>(comps.size());
  return label;
}

inline bool is_clique(const Graph& g, const VertexList& s) {
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = i + 1; j < s.size(); ++j)
      if (!g.adjacent(s[i], s[j])) return false;
  return true;
}

inline VertexList neighborhood(const Graph& g, const VertexList& s, const Mask* alive = nullptr) {
  Mask in = mask_of(g.size(), s);
  VertexList out;
  for (Vertex v : s)
    for (Vertex w : g.neighbors(v))
      if (!in[w] && alive_at(alive, w)) out.push_back(w);
  sort_unique(out);
  return out;
}

// Shortest path from s to t through vertices allowed by the mask (s and t included).
inline std::optional<VertexList> bfs_path(const Graph& g, Vertex s, Vertex t, const Mask& allowed) {
  if (!allowed[s] || !allowed[t]) return std::nullopt;
  std::vector<int> prev(g.size(), -2);
  std::queue<Vertex> q;
  q.push(s);
  prev[s] = -1;
  while (!q.empty()) {
    Vertex u = q.front();
    q.pop();
    if (u == t) break;
    for (Vertex w : g.neighbors(u))
      if (prev[w] == -2 && allowed[w]) {
        prev[w] = u;
        q.push(w);
      }
  }
  if (prev[t] == -2) return std::nullopt;
  VertexList path;
  for (Vertex v = t; v != -1; v = prev[v]) path.push_back(v);
  std::reverse(path.begin(), path.end());
  return path;
}

struct Hole {
  VertexList cycle;  // cyclic order
  int length() const { return static_cast<int>(cycle.size()); }
  VertexList vertex_set() const {
    VertexList s = cycle;
    sort_unique(s);
    return s;
  }
};

inline bool verify_hole(const Graph& g, const Hole& h) {
  const auto& c = h.cycle;
  const int len = static_cast<int>(c.size());
  if (len < 4) return false;
  VertexList s = c;
  sort_unique(s);
  if (static_cast<int>(s.size()) != len) return false;
  for (int i = 0; i < len; ++i)
    for (int j = i + 1; j < len; ++j) {
      bool consecutive = (j == i + 1) || (i == 0 && j == len - 1);
      if (g.adjacent(c[i], c[j]) != consecutive) return false;
    }
  return true;
}

inline bool is_induced_path(const Graph& g, const VertexList& p) {
  const int len = static_cast<int>(p.size());
  if (len == 0) return false;
  VertexList s = p;
  sort_unique(s);
  if (static_cast<int>(s.size()) != len) return false;
  for (int i = 0; i < len; ++i)
    for (int j = i + 1; j < len; ++j)
      if (g.adjacent(p[i], p[j]) != (j == i + 1)) return false;
  return true;
}

// Replaces a walk by a shortest path between its ends inside the walk's vertex set.
inline VertexList shortcut_walk(const Graph& g, const VertexList& walk) {
  if (walk.empty()) throw std::invalid_argument("empty walk");
  Mask allowed(g.size(), 0);
  for (Vertex v : walk) allowed.at(v) = 1;
  auto p = bfs_path(g, walk.front(), walk.back(), allowed);
  if (!p) throw std::invalid_argument("walk is not connected");
  return *p;
}

class DiGraph {
 public:
  DiGraph() = default;
  explicit DiGraph(int n) : out_(n), in_(n) {}

  int size() const { return static_cast<int>(out_.size()); }
  int num_arcs() const { return arcs_; }

  bool add_arc(Vertex u, Vertex v) {
    check(u);
    check(v);
    if (u == v) throw std::invalid_argument("self-loop arc");
    auto& a = out_[u];
    auto it = std::lower_bound(a.begin(), a.end(), v);
    if (it != a.end() && *it == v) return false;
    a.insert(it, v);
    auto& b = in_[v];
    b.insert(std::lower_bound(b.begin(), b.end(), u), u);
    ++arcs_;
    return true;
  }

  bool has_arc(Vertex u, Vertex v) const {
    check(u);
    check(v);
    return contains_sorted(out_[u], v);
  }

  const VertexList& out(Vertex v) const {
    check(v);
    return out_[v];
  }
  const VertexList& in(Vertex v) const {
    check(v);
    return in_[v];
  }

  std::vector<Edge> arcs() const {
    std::vector<Edge> a;
    for (Vertex u = 0; u < size(); ++u)
      for (Vertex v : out_[u]) a.emplace_back(u, v);
    return a;
  }

  bool operator==(const DiGraph& o) const { return out_ == o.out_; }

 private:
  void check(Vertex v) const {
    if (v < 0 || v >= size()) throw std::out_of_range("vertex " + std::to_string(v) + " out of range");
  }
  std::vector<VertexList> out_, in_;
  int arcs_ = 0;
};

// Vertices reachable from the sources (forward) or reaching them (backward), avoiding dead vertices.
inline Mask reach(const DiGraph& d, const VertexList& sources, bool forward, const Mask* alive = nullptr) {
  Mask seen(d.size(), 0);
  std::vector<Vertex> stack;
  for (Vertex s : sources)
    if (alive_at(alive, s) && !seen[s]) {
      seen[s] = 1;
      stack.push_back(s);
    }
  while (!stack.empty()) {
    Vertex u = stack.back();
    stack.pop_back();
    for (Vertex w : forward ? d.out(u) : d.in(u))
      if (!seen[w] && alive_at(alive, w)) {
        seen[w] = 1;
        stack.push_back(w);
      }
  }
  return seen;
}

inline std::optional<VertexList> bfs_dipath(const DiGraph& d, Vertex s, Vertex t, const Mask* alive = nullptr) {
  if (!alive_at(alive, s) || !alive_at(alive, t)) return std::nullopt;
  std::vector<int> prev(d.size(), -2);
  std::queue<Vertex> q;
  q.push(s);
  prev[s] = -1;
  while (!q.empty()) {
    Vertex u = q.front();
    q.pop();
    if (u == t) break;
    for (Vertex w : d.out(u))
      if (prev[w] == -2 && alive_at(alive, w)) {
        prev[w] = u;
        q.push(w);
      }
  }
  if (prev[t] == -2) return std::nullopt;
  VertexList path;
  for (Vertex v = t; v != -1; v = prev[v]) path.push_back(v);
  std::reverse(path.begin(), path.end());
  return path;
}

inline bool is_acyclic(const DiGraph& d) {
  std::vector<int> indeg(d.size(), 0);
  for (Vertex v = 0; v < d.size(); ++v) indeg[v] = static_cast<int>(d.in(v).size());
  std::vector<Vertex> stack;
  for (Vertex v = 0; v < d.size(); ++v)
    if (!indeg[v]) stack.push_back(v);
  int done = 0;
  while (!stack.empty()) {
    Vertex u = stack.back();
    stack.pop_back();
    ++done;
    for (Vertex w : d.out(u))
      if (--indeg[w] == 0) stack.push_back(w);
  }
  return done == d.size();
}

}  // namespace chvd

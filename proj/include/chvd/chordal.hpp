#pragma once

#include <functional>
#include <numeric>
#include <variant>

#include "graph.hpp"

namespace chvd {

struct Peo {
  VertexList order;  // order[0] is eliminated first
};

// Maximum cardinality search over live vertices; ties go to the smallest id.
inline VertexList mcs_order(const Graph& g, const Mask* alive = nullptr) {
  const int n = g.size();
  std::vector<int> weight(n, 0);
  std::vector<char> done(n, 0);
  VertexList visit;
  int live = 0;
  for (Vertex v = 0; v < n; ++v) live += alive_at(alive, v) ? 1 : 0;
  visit.reserve(live);
  for (int step = 0; step < live; ++step) {
    Vertex best = -1;
    for (Vertex v = 0; v < n; ++v)
      if (!done[v] && alive_at(alive, v) && (best < 0 || weight[v] > weight[best])) best = v;
    done[best] = 1;
    visit.push_back(best);
    for (Vertex w : g.neighbors(best))
      if (!done[w]) ++weight[w];
  }
  return visit;
}

// Hole through v formed by two non-adjacent neighbours and a path avoiding the rest of N[v].
inline std::optional<Hole> find_hole_through(const Graph& g, Vertex v, const Mask* alive = nullptr) {
  if (!alive_at(alive, v)) return std::nullopt;
  VertexList nb;
  for (Vertex w : g.neighbors(v))
    if (alive_at(alive, w)) nb.push_back(w);
  Mask allowed(g.size(), 0);
  for (Vertex w = 0; w < g.size(); ++w) allowed[w] = alive_at(alive, w) ? 1 : 0;
  allowed[v] = 0;
  for (Vertex w : nb) allowed[w] = 0;
  std::vector<int> label = component_labels(g, &allowed);
  for (std::size_t i = 0; i < nb.size(); ++i)
    for (std::size_t j = i + 1; j < nb.size(); ++j) {
      Vertex u1 = nb[i], u2 = nb[j];
      if (g.adjacent(u1, u2)) continue;
      // u1 and u2 must touch a common component of G - N[v].
      bool shared = false;
      for (Vertex a : g.neighbors(u1)) {
        if (!allowed[a]) continue;
        for (Vertex b : g.neighbors(u2))
          if (allowed[b] && label[a] == label[b]) {
            shared = true;
            break;
          }
        if (shared) break;
      }
      if (!shared) continue;
      allowed[u1] = allowed[u2] = 1;
      auto p = bfs_path(g, u1, u2, allowed);
      allowed[u1] = allowed[u2] = 0;
      if (p) {
        Hole h;
        h.cycle.push_back(v);
        h.cycle.insert(h.cycle.end(), p->begin(), p->end());
        return h;
      }
    }
  return std::nullopt;
}

inline std::optional<Hole> find_any_hole(const Graph& g, const Mask* alive = nullptr) {
  for (Vertex v = 0; v < g.size(); ++v)
    if (auto h = find_hole_through(g, v, alive)) return h;
  return std::nullopt;
}

// Shortest hole over all live vertices, or nullopt when the graph is chordal.
inline std::optional<Hole> shortest_hole(const Graph& g, const Mask* alive = nullptr) {
  std::optional<Hole> best;
  Mask allowed(g.size(), 0);
  for (Vertex v = 0; v < g.size(); ++v) {
    if (!alive_at(alive, v)) continue;
    for (Vertex w = 0; w < g.size(); ++w) allowed[w] = alive_at(alive, w) ? 1 : 0;
    allowed[v] = 0;
    VertexList nb;
    for (Vertex w : g.neighbors(v))
      if (alive_at(alive, w)) {
        nb.push_back(w);
        allowed[w] = 0;
      }
    for (std::size_t i = 0; i < nb.size(); ++i)
      for (std::size_t j = i + 1; j < nb.size(); ++j) {
        if (g.adjacent(nb[i], nb[j])) continue;
        allowed[nb[i]] = allowed[nb[j]] = 1;
        auto p = bfs_path(g, nb[i], nb[j], allowed);
        allowed[nb[i]] = allowed[nb[j]] = 0;
        if (p && (!best || static_cast<int>(p->size()) + 1 < best->length())) {
          Hole h;
          h.cycle.push_back(v);
          h.cycle.insert(h.cycle.end(), p->begin(), p->end());
          best = h;
          if (best->length() == 4) return best;
        }
      }
  }
  return best;
}

inline std::variant<Peo, Hole> recognize(const Graph& g, const Mask* alive = nullptr) {
  VertexList visit = mcs_order(g, alive);
  Peo peo;
  peo.order.assign(visit.rbegin(), visit.rend());
  std::vector<int> pos(g.size(), -1);
  for (int i = 0; i < static_cast<int>(peo.order.size()); ++i) pos[peo.order[i]] = i;
  for (Vertex v : peo.order) {
    Vertex parent = -1;
    for (Vertex w : g.neighbors(v))
      if (pos[w] > pos[v] && (parent < 0 || pos[w] < pos[parent])) parent = w;
    if (parent < 0) continue;
    for (Vertex w : g.neighbors(v)) {
      if (pos[w] <= pos[v] || w == parent || g.adjacent(parent, w)) continue;
      // parent and w are non-adjacent later neighbours of v
      Mask allowed(g.size(), 0);
      for (Vertex x = 0; x < g.size(); ++x) allowed[x] = alive_at(alive, x) ? 1 : 0;
      allowed[v] = 0;
      for (Vertex x : g.neighbors(v)) allowed[x] = 0;
      allowed[parent] = allowed[w] = 1;
      if (auto p = bfs_path(g, parent, w, allowed)) {
        Hole h;
        h.cycle.push_back(v);
        h.cycle.insert(h.cycle.end(), p->begin(), p->end());
        return h;
      }
      if (auto h = find_any_hole(g, alive)) return *h;
      throw InvariantError("elimination test failed but no hole was found");
    }
  }
  return peo;
}

inline bool is_chordal(const Graph& g, const Mask* alive = nullptr) {
  return std::holds_alternative<Peo>(recognize(g, alive));
}

inline bool is_peo(const Graph& g, const Peo& peo) {
  std::vector<int> pos(g.size(), -1);
  for (int i = 0; i < static_cast<int>(peo.order.size()); ++i) pos[peo.order[i]] = i;
  for (Vertex v : peo.order) {
    VertexList later;
    for (Vertex w : g.neighbors(v))
      if (pos[w] > pos[v]) later.push_back(w);
    if (!is_clique(g, later)) return false;
  }
  return true;
}

class CliqueTree {
 public:
  using Node = int;

  CliqueTree() = default;

  // Bags must be the maximal cliques; edges form a spanning tree on them.
  CliqueTree(int graph_size, std::vector<VertexList> bags, const std::vector<std::pair<Node, Node>>& edges)
      : bags_(std::move(bags)), adj_(bags_.size()), nodes_of_(graph_size) {
    for (auto [a, b] : edges) {
      adj_.at(a).push_back(b);
      adj_.at(b).push_back(a);
    }
    for (auto& a : adj_) std::sort(a.begin(), a.end());
    for (Node p = 0; p < num_nodes(); ++p)
      for (Vertex v : bags_[p]) nodes_of_.at(v).push_back(p);
    if (num_nodes() > 0) reroot(0);
  }

  int num_nodes() const { return static_cast<int>(bags_.size()); }
  int graph_size() const { return static_cast<int>(nodes_of_.size()); }
  Node root() const { return root_; }
  const VertexList& bag(Node p) const { return bags_.at(p); }
  Node parent(Node p) const { return parent_.at(p); }
  const std::vector<Node>& children(Node p) const { return children_.at(p); }
  const std::vector<Node>& tree_neighbors(Node p) const { return adj_.at(p); }
  int depth(Node p) const { return depth_.at(p); }
  const std::vector<Node>& nodes_of(Vertex v) const { return nodes_of_.at(v); }
  bool in_bag(Node p, Vertex v) const { return contains_sorted(bags_.at(p), v); }
  bool covers(Vertex v) const { return !nodes_of(v).empty(); }
  const std::vector<Node>& preorder() const { return preorder_; }

  Node top(Vertex v) const {
    const auto& ns = nodes_of(v);
    if (ns.empty()) throw std::invalid_argument("vertex " + std::to_string(v) + " is not in the tree");
    Node best = ns.front();
    for (Node p : ns)
      if (depth_[p] < depth_[best]) best = p;
    return best;
  }

  void reroot(Node r) {
    if (r < 0 || r >= num_nodes()) throw std::out_of_range("tree node out of range");
    root_ = r;
    parent_.assign(num_nodes(), -1);
    depth_.assign(num_nodes(), -1);
    children_.assign(num_nodes(), {});
    preorder_.clear();
    std::vector<Node> stack{r};
    depth_[r] = 0;
    while (!stack.empty()) {
      Node p = stack.back();
      stack.pop_back();
      preorder_.push_back(p);
      for (auto it = adj_[p].rbegin(); it != adj_[p].rend(); ++it) {
        Node q = *it;
        if (depth_[q] >= 0) continue;
        depth_[q] = depth_[p] + 1;
        parent_[q] = p;
        stack.push_back(q);
      }
    }
    for (Node p : preorder_)
      if (parent_[p] >= 0) children_[parent_[p]].push_back(p);
    for (auto& c : children_) std::sort(c.begin(), c.end());
    ensure(static_cast<int>(preorder_.size()) == num_nodes(), "clique tree is not connected");
  }

  VertexList adhesion(Node p, Node q) const { return set_intersection(bag(p), bag(q)); }

  Node lca(Node p, Node q) const {
    while (depth_.at(p) > depth_.at(q)) p = parent_[p];
    while (depth_[q] > depth_[p]) q = parent_[q];
    while (p != q) {
      p = parent_[p];
      q = parent_[q];
    }
    return p;
  }

  int node_distance(Node p, Node q) const {
    Node a = lca(p, q);
    return depth_[p] + depth_[q] - 2 * depth_[a];
  }

  std::vector<Node> tree_path(Node p, Node q) const {
    Node a = lca(p, q);
    std::vector<Node> up, down;
    for (Node x = p; x != a; x = parent_[x]) up.push_back(x);
    up.push_back(a);
    for (Node x = q; x != a; x = parent_[x]) down.push_back(x);
    up.insert(up.end(), down.rbegin(), down.rend());
    return up;
  }

  bool is_ancestor(Node anc, Node p) const {
    while (p >= 0 && depth_[p] > depth_[anc]) p = parent_[p];
    return p == anc;
  }

  // Shortest tree path joining the subtrees of s and u. Empty when they share a bag.
  std::vector<Node> minimal_path(Vertex s, Vertex u) const {
    auto full = tree_path(top(s), top(u));
    int last_s = -1, first_u = -1;
    for (int i = 0; i < static_cast<int>(full.size()); ++i)
      if (in_bag(full[i], s)) last_s = i;
    for (int i = static_cast<int>(full.size()) - 1; i >= 0; --i)
      if (in_bag(full[i], u)) first_u = i;
    if (first_u <= last_s) return {};
    return {full.begin() + last_s, full.begin() + first_u + 1};
  }

  // From top(s) up to the root.
  std::vector<Node> path_to_root(Vertex s) const {
    std::vector<Node> out;
    for (Node p = top(s); p >= 0; p = parent_[p]) out.push_back(p);
    return out;
  }

  int subtree_distance(Vertex s, Vertex u) const {
    auto p = minimal_path(s, u);
    return p.empty() ? 0 : static_cast<int>(p.size()) - 1;
  }

  int distance_to_node(Vertex s, Node q) const {
    int best = -1;
    for (Node p : nodes_of(s)) {
      int d = node_distance(p, q);
      if (best < 0 || d < best) best = d;
    }
    if (best < 0) throw std::invalid_argument("vertex " + std::to_string(s) + " is not in the tree");
    return best;
  }

  // Node whose bag contains the clique; closest to the root, then lowest id.
  std::optional<Node> node_containing(const VertexList& clique) const {
    std::optional<Node> best;
    for (Node p = 0; p < num_nodes(); ++p)
      if (is_subset(clique, bag(p)) && (!best || depth_[p] < depth_[*best])) best = p;
    return best;
  }

  std::optional<Node> node_with_bag(const VertexList& bag_set) const {
    for (Node p = 0; p < num_nodes(); ++p)
      if (bags_[p] == bag_set) return p;
    return std::nullopt;
  }

  // Nodes of the subtree rooted at p.
  std::vector<Node> subtree(Node p) const {
    std::vector<Node> out{p};
    for (std::size_t i = 0; i < out.size(); ++i)
      for (Node c : children_[out[i]]) out.push_back(c);
    return out;
  }

  // Throws InvariantError unless this is a clique tree of g restricted to the live vertices.
  void validate(const Graph& g, const Mask* alive = nullptr) const {
    for (Node p = 0; p < num_nodes(); ++p) {
      ensure(!bags_[p].empty(), "empty bag");
      ensure(is_clique(g, bags_[p]), "bag is not a clique");
      for (Vertex v : bags_[p]) ensure(alive_at(alive, v), "bag holds a dead vertex");
      Vertex a = bags_[p].front();
      for (Vertex w : g.neighbors(a)) {
        if (!alive_at(alive, w) || in_bag(p, w)) continue;
        bool all = true;
        for (Vertex b : bags_[p])
          if (!g.adjacent(b, w)) {
            all = false;
            break;
          }
        ensure(!all, "bag is not a maximal clique");
      }
    }
    for (Vertex v = 0; v < g.size(); ++v) {
      if (!alive_at(alive, v)) continue;
      ensure(covers(v), "vertex not covered by any bag");
      for (Vertex w : g.neighbors(v))
        if (v < w && alive_at(alive, w))
          ensure(!set_intersection(VertexList(nodes_of(v)), VertexList(nodes_of(w))).empty(),
                 "edge not covered by any bag");
      // connectivity of nodes_of(v): exactly one node without a parent inside the set
      int tops = 0;
      for (Node p : nodes_of(v))
        if (parent_[p] < 0 || !in_bag(parent_[p], v)) ++tops;
      ensure(tops == 1, "bags containing a vertex are not connected");
    }
  }

 private:
  std::vector<VertexList> bags_;
  std::vector<std::vector<Node>> adj_;
  std::vector<std::vector<Node>> nodes_of_;
  std::vector<Node> parent_, depth_;
  std::vector<std::vector<Node>> children_;
  std::vector<Node> preorder_;
  Node root_ = -1;
};

// Maximal cliques read off a perfect elimination order, in elimination order.
inline std::vector<VertexList> peo_cliques(const Graph& g, const Peo& peo) {
  std::vector<int> pos(g.size(), -1);
  for (int i = 0; i < static_cast<int>(peo.order.size()); ++i) pos[peo.order[i]] = i;
  const int n = static_cast<int>(peo.order.size());
  std::vector<VertexList> later(n);
  std::vector<int> parent(n, -1);
  for (int i = 0; i < n; ++i) {
    Vertex v = peo.order[i];
    for (Vertex w : g.neighbors(v))
      if (pos[w] > i) {
        later[i].push_back(w);
        if (parent[i] < 0 || pos[w] < parent[i]) parent[i] = pos[w];
      }
  }
  std::vector<char> maximal(n, 1);
  for (int i = 0; i < n; ++i)
    if (parent[i] >= 0 && later[i].size() == later[parent[i]].size() + 1) maximal[parent[i]] = 0;
  std::vector<VertexList> cliques;
  for (int i = 0; i < n; ++i)
    if (maximal[i]) {
      VertexList c = later[i];
      c.push_back(peo.order[i]);
      std::sort(c.begin(), c.end());
      cliques.push_back(std::move(c));
    }
  return cliques;
}

// Maximum-weight spanning tree on bag intersections (Kruskal), rooted at node 0.
inline CliqueTree build_clique_tree(const Graph& g, const Peo& peo) {
  auto bags = peo_cliques(g, peo);
  const int c = static_cast<int>(bags.size());
  struct Cand {
    int w, a, b;
  };
  std::vector<Cand> cand;
  for (int a = 0; a < c; ++a)
    for (int b = a + 1; b < c; ++b)
      cand.push_back({static_cast<int>(set_intersection(bags[a], bags[b]).size()), a, b});
  std::stable_sort(cand.begin(), cand.end(), [](const Cand& x, const Cand& y) { return x.w > y.w; });
  std::vector<int> uf(c);
  std::iota(uf.begin(), uf.end(), 0);
  std::function<int(int)> find = [&](int x) { return uf[x] == x ? x : uf[x] = find(uf[x]); };
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : cand) {
    int ra = find(e.a), rb = find(e.b);
    if (ra == rb) continue;
    uf[ra] = rb;
    edges.emplace_back(e.a, e.b);
  }
  return CliqueTree(g.size(), std::move(bags), edges);
}

inline CliqueTree build_clique_tree(const Graph& g, const Mask* alive = nullptr) {
  auto r = recognize(g, alive);
  if (!std::holds_alternative<Peo>(r)) throw std::invalid_argument("graph is not chordal");
  return build_clique_tree(g, std::get<Peo>(r));
}

// Induced s-u path whose inner vertices come from adhesions along the minimal tree path.
inline std::optional<VertexList> induced_path_avoiding(const Graph& g, const CliqueTree& t, Vertex s, Vertex u,
                                                       const Mask& forbidden) {
  if (forbidden[s] || forbidden[u]) return std::nullopt;
  if (s == u) return VertexList{s};
  if (g.adjacent(s, u)) return VertexList{s, u};
  auto path = t.minimal_path(s, u);
  if (path.empty()) return std::nullopt;
  VertexList walk{s};
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    Vertex pick = -1;
    for (Vertex w : t.adhesion(path[i], path[i + 1]))
      if (!forbidden[w]) {
        pick = w;
        break;
      }
    if (pick < 0) return std::nullopt;
    walk.push_back(pick);
  }
  walk.push_back(u);
  return shortcut_walk(g, walk);
}

// Maximum independent set of a chordal graph: greedy along a perfect elimination order.
inline VertexList mis_chordal(const Graph& g, const Mask* alive = nullptr) {
  auto r = recognize(g, alive);
  if (!std::holds_alternative<Peo>(r)) throw std::invalid_argument("graph is not chordal");
  Mask blocked(g.size(), 0);
  VertexList out;
  for (Vertex v : std::get<Peo>(r).order) {
    if (blocked[v]) continue;
    out.push_back(v);
    blocked[v] = 1;
    for (Vertex w : g.neighbors(v)) blocked[w] = 1;
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Bag X with every component of G - X weighing at most half of the total.
inline VertexList central_bag(const Graph& g, const std::vector<double>& weight, const Mask* alive = nullptr) {
  CliqueTree t = build_clique_tree(g, alive);
  if (t.num_nodes() == 0) return {};
  double total = 0;
  for (Vertex v = 0; v < g.size(); ++v)
    if (alive_at(alive, v)) total += weight.at(v);
  CliqueTree::Node cur = t.root();
  for (int step = 0; step <= 2 * t.num_nodes(); ++step) {
    Mask rest(g.size(), 0);
    for (Vertex v = 0; v < g.size(); ++v) rest[v] = alive_at(alive, v) && !t.in_bag(cur, v);
    Vertex heavy = -1;
    for (const auto& comp : connected_components(g, &rest)) {
      double w = 0;
      for (Vertex v : comp) w += weight[v];
      if (w > total / 2 + 1e-12) {
        heavy = comp.front();
        break;
      }
    }
    if (heavy < 0) return t.bag(cur);
    auto path = t.tree_path(cur, t.top(heavy));
    ensure(path.size() >= 2, "central bag walk stalled");
    cur = path[1];
  }
  throw InvariantError("central bag walk did not terminate");
}

// Bron-Kerbosch with pivoting; cliques sorted lexicographically.
inline std::vector<VertexList> maximal_cliques(const Graph& g, const Mask* alive = nullptr) {
  std::vector<VertexList> out;
  VertexList r;
  std::function<void(VertexList, VertexList)> bk = [&](VertexList p, VertexList x) {
    if (p.empty() && x.empty()) {
      VertexList c = r;
      std::sort(c.begin(), c.end());
      out.push_back(std::move(c));
      return;
    }
    Vertex pivot = -1;
    std::size_t best = 0;
    for (const auto* s : {&p, &x})
      for (Vertex u : *s) {
        std::size_t cnt = set_intersection(p, g.neighbors(u)).size();
        if (pivot < 0 || cnt > best) {
          pivot = u;
          best = cnt;
        }
      }
    VertexList cand = set_difference(p, g.neighbors(pivot));
    for (Vertex v : cand) {
      r.push_back(v);
      bk(set_intersection(p, g.neighbors(v)), set_intersection(x, g.neighbors(v)));
      r.pop_back();
      p.erase(std::lower_bound(p.begin(), p.end(), v));
      x.insert(std::lower_bound(x.begin(), x.end(), v), v);
    }
  };
  VertexList all;
  for (Vertex v = 0; v < g.size(); ++v)
    if (alive_at(alive, v)) all.push_back(v);
  // dead neighbours never enter p or x since both start inside the live set
  if (!all.empty()) bk(all, {});
  std::sort(out.begin(), out.end());
  return out;
}

inline int clique_number(const Graph& g, const Mask* alive = nullptr) {
  int w = 0;
  for (const auto& c : maximal_cliques(g, alive)) w = std::max(w, static_cast<int>(c.size()));
  return w;
}

}  // namespace chvd

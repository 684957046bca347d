#pragma once

#include "lp.hpp"

namespace chvd {

namespace detail {

class FlowNetwork {
 public:
  static constexpr long long kInf = std::numeric_limits<long long>::max() / 4;

  explicit FlowNetwork(int n) : adj_(n), level_(n), it_(n) {}

  void add(int u, int v, long long cap) {
    adj_[u].push_back({v, cap, static_cast<int>(adj_[v].size())});
    adj_[v].push_back({u, 0, static_cast<int>(adj_[u].size()) - 1});
  }

  long long max_flow(int s, int t) {
    long long flow = 0;
    while (bfs(s, t)) {
      std::fill(it_.begin(), it_.end(), 0);
      while (long long f = dfs(s, t, kInf)) {
        flow += f;
        if (flow >= kInf) return flow;
      }
    }
    return flow;
  }

  std::vector<char> residual_reach(int s) const {
    std::vector<char> seen(adj_.size(), 0);
    std::vector<int> stack{s};
    seen[s] = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (const auto& a : adj_[u])
        if (a.cap > 0 && !seen[a.to]) {
          seen[a.to] = 1;
          stack.push_back(a.to);
        }
    }
    return seen;
  }

 private:
  struct Arc {
    int to;
    long long cap;
    int rev;
  };

  bool bfs(int s, int t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<int> q;
    level_[s] = 0;
    q.push(s);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (const auto& a : adj_[u])
        if (a.cap > 0 && level_[a.to] < 0) {
          level_[a.to] = level_[u] + 1;
          q.push(a.to);
        }
    }
    return level_[t] >= 0;
  }

  long long dfs(int u, int t, long long f) {
    if (u == t) return f;
    for (int& i = it_[u]; i < static_cast<int>(adj_[u].size()); ++i) {
      Arc& a = adj_[u][i];
      if (a.cap <= 0 || level_[a.to] != level_[u] + 1) continue;
      long long d = dfs(a.to, t, std::min(f, a.cap));
      if (d > 0) {
        a.cap -= d;
        adj_[a.to][a.rev].cap += d;
        return d;
      }
    }
    return 0;
  }

  std::vector<std::vector<Arc>> adj_;
  std::vector<int> level_, it_;
};

}  // namespace detail

// Minimum set of deletable vertices meeting every path from a source to a sink.
inline VertexList min_vertex_cut(const DiGraph& d, const VertexList& sources, const VertexList& sinks,
                                 const Mask& deletable, const Mask* alive = nullptr) {
  const int n = d.size();
  const int src = 2 * n, snk = 2 * n + 1;
  detail::FlowNetwork net(2 * n + 2);
  const long long inf = detail::FlowNetwork::kInf;
  for (Vertex v = 0; v < n; ++v) {
    if (!alive_at(alive, v)) continue;
    net.add(2 * v, 2 * v + 1, deletable.at(v) ? 1 : inf);
    for (Vertex w : d.out(v))
      if (alive_at(alive, w)) net.add(2 * v + 1, 2 * w, inf);
  }
  for (Vertex s : sources)
    if (alive_at(alive, s)) net.add(src, 2 * s, inf);
  for (Vertex t : sinks)
    if (alive_at(alive, t)) net.add(2 * t + 1, snk, inf);
  if (net.max_flow(src, snk) >= inf) throw std::invalid_argument("no cut avoids the undeletable vertices");
  auto seen = net.residual_reach(src);
  VertexList cut;
  for (Vertex v = 0; v < n; ++v)
    if (alive_at(alive, v) && seen[2 * v] && !seen[2 * v + 1]) cut.push_back(v);
  return cut;
}

inline bool is_multicut(const MulticutInstance& inst, const VertexList& x) {
  Mask alive = full_mask(inst.d.size());
  for (Vertex v : x) alive.at(v) = 0;
  for (auto [s, t] : inst.terminals) {
    if (!alive[s] || !alive[t]) continue;
    if (reach(inst.d, {s}, true, &alive)[t]) return false;
  }
  return true;
}

// Terminal pairs (tu[i], tv[j]) closed under moving i up and j down.
struct SkewInstance {
  DiGraph d;
  VertexList tu, tv;
  std::vector<Edge> pairs;

  MulticutInstance as_multicut() const { return {d, pairs}; }
};

inline bool is_staircase(const SkewInstance& s, std::string* why = nullptr) {
  auto fail = [&](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  const int a = static_cast<int>(s.tu.size()), b = static_cast<int>(s.tv.size());
  std::map<Vertex, int> iu, iv;
  for (int i = 0; i < a; ++i)
    if (!iu.emplace(s.tu[i], i).second) return fail("duplicate vertex in Tu");
  for (int j = 0; j < b; ++j)
    if (!iv.emplace(s.tv[j], j).second) return fail("duplicate vertex in Tv");
  for (Vertex u : s.tu)
    if (iv.count(u)) return fail("Tu and Tv intersect");
  std::vector<std::vector<char>> in(a, std::vector<char>(b, 0));
  for (auto [u, v] : s.pairs) {
    if (!iu.count(u) || !iv.count(v)) return fail("pair outside Tu x Tv");
    in[iu[u]][iv[v]] = 1;
  }
  for (int i = 0; i < a; ++i)
    for (int j = 0; j < b; ++j)
      if (in[i][j] && ((i + 1 < a && !in[i + 1][j]) || (j > 0 && !in[i][j - 1])))
        return fail("pair set is not a staircase");
  return true;
}

inline int ceil_log2(long long v) {
  int r = 0;
  while ((1LL << r) < v) ++r;
  return r;
}

struct SkewReport {
  int calls = 0;
  int max_depth = 0;
  double bound = 0;
};

inline VertexList skew_multicut(const SkewInstance& inst, const FractionalSolution& x, SkewReport* report = nullptr) {
  std::string why;
  if (!is_staircase(inst, &why)) throw std::invalid_argument(why);
  if (static_cast<int>(x.x.size()) != inst.d.size()) throw std::invalid_argument("solution size mismatch");
  if (separate_multicut(inst.as_multicut(), x)) throw std::invalid_argument("fractional solution is infeasible");
  const int n = inst.d.size(), a = static_cast<int>(inst.tu.size()), b = static_cast<int>(inst.tv.size());
  // copies u' -> u and v -> v' keep terminals themselves deletable
  DiGraph ext(n + a + b);
  for (auto [u, v] : inst.d.arcs()) ext.add_arc(u, v);
  for (int i = 0; i < a; ++i) ext.add_arc(n + i, inst.tu[i]);
  for (int j = 0; j < b; ++j) ext.add_arc(inst.tv[j], n + a + j);
  Mask deletable(n + a + b, 0);
  for (Vertex v = 0; v < n; ++v) deletable[v] = 1;
  std::vector<std::vector<char>> in(a, std::vector<char>(b, 0));
  {
    std::map<Vertex, int> iu, iv;
    for (int i = 0; i < a; ++i) iu[inst.tu[i]] = i;
    for (int j = 0; j < b; ++j) iv[inst.tv[j]] = j;
    for (auto [u, v] : inst.pairs) in[iu[u]][iv[v]] = 1;
  }
  SkewReport rep;
  VertexList result;
  std::function<void(const Mask&, const std::vector<int>&, const std::vector<int>&, int)> solve =
      [&](const Mask& alive, const std::vector<int>& us, const std::vector<int>& vs, int depth) {
        ++rep.calls;
        rep.max_depth = std::max(rep.max_depth, depth);
        bool any = false;
        for (int i : us)
          for (int j : vs) any = any || in[i][j];
        if (!any) return;
        if (us.size() == 1) {
          VertexList sinks;
          for (int j : vs)
            if (in[us[0]][j]) sinks.push_back(n + a + j);
          for (Vertex c : min_vertex_cut(ext, {n + us[0]}, sinks, deletable, &alive)) result.push_back(c);
          return;
        }
        const std::size_t h = us.size() / 2;
        std::vector<int> u1(us.begin(), us.begin() + h), u2(us.begin() + h, us.end());
        int last = -1;
        for (int p = 0; p < static_cast<int>(vs.size()); ++p)
          if (in[u2.front()][vs[p]]) last = p;
        std::vector<int> v1(vs.begin(), vs.begin() + (last + 1)), v2(vs.begin() + (last + 1), vs.end());
        Mask rest = alive;
        if (!v1.empty()) {
          VertexList src, dst;
          for (int i : u2) src.push_back(n + i);
          for (int j : v1) dst.push_back(n + a + j);
          for (Vertex c : min_vertex_cut(ext, src, dst, deletable, &alive)) {
            result.push_back(c);
            rest[c] = 0;
          }
        }
        VertexList dst1, src2;
        for (int j : v1) dst1.push_back(n + a + j);
        for (int i : u2) src2.push_back(n + i);
        Mask a1 = reach(ext, dst1, false, &rest);
        Mask a2 = reach(ext, src2, true, &rest);
        for (int v = 0; v < n + a + b; ++v) ensure(!(a1[v] && a2[v]), "skew recursion sides overlap");
        solve(a1, u1, v1, depth + 1);
        solve(a2, u2, v2, depth + 1);
      };
  std::vector<int> us(a), vs(b);
  std::iota(us.begin(), us.end(), 0);
  std::iota(vs.begin(), vs.end(), 0);
  solve(full_mask(n + a + b), us, vs, 0);
  sort_unique(result);
  rep.bound = x.total() * ceil_log2(static_cast<long long>(a) + 1);
  ensure(static_cast<double>(result.size()) <= rep.bound + 1e-6, "skew multicut exceeds its bound");
  ensure(is_multicut(inst.as_multicut(), result), "skew multicut leaves a pair connected");
  if (report) *report = rep;
  return result;
}

// A chordal graph with a rooted clique tree, oriented from ancestors to descendants.
struct DownwardInstance {
  Graph g;
  CliqueTree tree;
  Mask members;
  VertexList order;       // members sorted by (depth of top, id)
  std::vector<int> rank;  // position in order, -1 outside
  DiGraph arcs;

  bool precedes(Vertex u, Vertex v) const { return rank.at(u) < rank.at(v); }
};

inline DownwardInstance build_downward(const Graph& g, CliqueTree t, const Mask* members = nullptr) {
  DownwardInstance inst;
  inst.g = g;
  inst.members = members ? *members : full_mask(g.size());
  for (Vertex v = 0; v < g.size(); ++v)
    if (inst.members[v]) {
      if (!t.covers(v)) throw std::invalid_argument("clique tree misses a member vertex");
      inst.order.push_back(v);
    }
  std::stable_sort(inst.order.begin(), inst.order.end(),
                   [&](Vertex a, Vertex b) { return t.depth(t.top(a)) < t.depth(t.top(b)); });
  inst.rank.assign(g.size(), -1);
  for (int i = 0; i < static_cast<int>(inst.order.size()); ++i) inst.rank[inst.order[i]] = i;
  inst.arcs = DiGraph(g.size());
  for (auto [u, v] : g.edges())
    if (inst.members[u] && inst.members[v]) {
      if (inst.rank[u] < inst.rank[v])
        inst.arcs.add_arc(u, v);
      else
        inst.arcs.add_arc(v, u);
    }
  ensure(is_acyclic(inst.arcs), "downward orientation has a cycle");
  inst.tree = std::move(t);
  return inst;
}

struct DownwardReport {
  VertexList x0;
  std::vector<Edge> pairs;                 // pairs still connected after removing x0
  std::vector<VertexList> inner;           // shortest path minus two vertices at each end
  std::vector<std::vector<int>> tree_nodes;  // internal nodes of the minimal tree path
  Graph overlap;                           // pairs adjacent when tree node sets meet
  std::vector<std::vector<int>> groups;    // clique cover of the overlap graph
  std::vector<double> mc2;                 // dist(u, bag) + dist(bag part, v) per pair
  int independent = 0;
};

namespace detail {

inline std::vector<double> dag_dist(const DiGraph& d, Vertex s, const std::vector<double>& x, const Mask& alive,
                                    bool forward) {
  return vertex_dijkstra(d.size(), s, x, [&](Vertex u, auto&& relax) {
         for (Vertex w : forward ? d.out(u) : d.in(u))
           if (alive[w]) relax(w);
       })
      .dist;
}

}  // namespace detail

inline VertexList downward_multicut(const DownwardInstance& inst, const std::vector<Edge>& terminals,
                                    const FractionalSolution& x, DownwardReport* report = nullptr) {
  const int n = inst.g.size();
  if (static_cast<int>(x.x.size()) != n) throw std::invalid_argument("solution size mismatch");
  MulticutInstance mi{inst.arcs, terminals};
  if (separate_multicut(mi, x)) throw std::invalid_argument("fractional solution is infeasible");
  DownwardReport rep;
  Mask alive = inst.members;
  for (Vertex v = 0; v < n; ++v)
    if (inst.members[v] && at_least(x[v], 1.0 / 8)) {
      rep.x0.push_back(v);
      alive[v] = 0;
    }
  for (auto [u, v] : terminals) {
    if (!alive[u] || !alive[v]) continue;
    if (auto p = bfs_dipath(inst.arcs, u, v, &alive)) {
      rep.pairs.emplace_back(u, v);
      VertexList inner;
      for (int i = 2; i + 2 < static_cast<int>(p->size()); ++i) inner.push_back((*p)[i]);
      sort_unique(inner);
      rep.inner.push_back(inner);
      auto mp = inst.tree.minimal_path(u, v);
      std::vector<int> internal;
      for (int i = 1; i + 1 < static_cast<int>(mp.size()); ++i) internal.push_back(mp[i]);
      std::sort(internal.begin(), internal.end());
      ensure(!internal.empty(), "terminal pair too close for a feasible solution");
      rep.tree_nodes.push_back(internal);
    }
  }
  const int np = static_cast<int>(rep.pairs.size());
  rep.overlap = Graph(np);
  for (int p = 0; p < np; ++p)
    for (int q = p + 1; q < np; ++q) {
      bool meet = false;
      for (int a : rep.tree_nodes[p])
        if (std::binary_search(rep.tree_nodes[q].begin(), rep.tree_nodes[q].end(), a)) meet = true;
      if (meet)
        rep.overlap.add_edge(p, q);
      else
        ensure(set_intersection(rep.inner[p], rep.inner[q]).empty(), "disjoint-interval pairs share inner vertices");
    }
  auto rec = recognize(rep.overlap);
  ensure(std::holds_alternative<Peo>(rec), "pair overlap graph is not chordal");
  {
    Mask taken(np, 0), covered(np, 0);
    const auto& order = std::get<Peo>(rec).order;
    std::vector<int> pos(np);
    for (int i = 0; i < np; ++i) pos[order[i]] = i;
    for (int p : order) {
      bool blocked = false;
      for (int q : rep.overlap.neighbors(p)) blocked = blocked || taken[q];
      if (blocked) continue;
      taken[p] = 1;
      std::vector<int> group;
      if (!covered[p]) group.push_back(p);
      covered[p] = 1;
      for (int q : rep.overlap.neighbors(p))
        if (pos[q] > pos[p] && !covered[q]) {
          covered[q] = 1;
          group.push_back(q);
        }
      if (!group.empty()) rep.groups.push_back(group);
      ++rep.independent;
    }
    for (int p = 0; p < np; ++p) ensure(covered[p], "clique cover misses a pair");
  }
  ensure(rep.independent <= 2 * x.total() + 1e-6 || np == 0, "too many independent pairs");

  VertexList result = rep.x0;
  DiGraph live(n);
  for (auto [u, v] : inst.arcs.arcs())
    if (alive[u] && alive[v]) live.add_arc(u, v);
  Mask all_deletable = alive;
  rep.mc2.assign(np, 0.0);
  for (const auto& group : rep.groups) {
    std::vector<int> common = rep.tree_nodes[group.front()];
    for (int p : group) common = set_intersection(common, rep.tree_nodes[p]);
    ensure(!common.empty(), "pairs in a clique share no tree node");
    const int s = common.front();
    VertexList bag;
    for (Vertex w : inst.tree.bag(s))
      if (alive[w]) bag.push_back(w);
    VertexList up_sources;
    std::vector<Edge> down;
    for (int p : group) {
      auto [u, v] = rep.pairs[p];
      auto du = detail::dag_dist(live, u, x.x, alive, true);
      auto dv = detail::dag_dist(live, v, x.x, alive, false);
      double to_bag = std::numeric_limits<double>::infinity(), from_part = to_bag;
      for (Vertex w : bag) {
        to_bag = std::min(to_bag, du[w]);
        if (!inst.precedes(w, u)) from_part = std::min(from_part, dv[w]);
      }
      rep.mc2[p] = to_bag + from_part;
      ensure(rep.mc2[p] >= 1.0 - 1e-6, "bag splits a pair below unit weight");
      if (at_least(to_bag, 0.5))
        up_sources.push_back(u);
      else
        down.emplace_back(u, v);
    }
    if (!up_sources.empty())
      for (Vertex c : min_vertex_cut(live, up_sources, bag, all_deletable, &alive)) result.push_back(c);
    if (!down.empty()) {
      std::map<Vertex, Vertex> first_u;  // v -> smallest u in the order
      for (auto [u, v] : down) {
        auto it = first_u.find(v);
        if (it == first_u.end() || inst.precedes(u, it->second)) first_u[v] = u;
      }
      SkewInstance sk;
      sk.d = live;
      sk.tu = bag;
      std::sort(sk.tu.begin(), sk.tu.end(), [&](Vertex a, Vertex b) { return inst.precedes(a, b); });
      for (auto& [v, u] : first_u) sk.tv.push_back(v);
      std::sort(sk.tv.begin(), sk.tv.end(), [&](Vertex a, Vertex b) {
        Vertex ua = first_u[a], ub = first_u[b];
        return ua != ub ? inst.precedes(ua, ub) : a < b;
      });
      for (Vertex v : sk.tv)
        for (Vertex w : sk.tu)
          if (!inst.precedes(w, first_u[v])) sk.pairs.emplace_back(w, v);
      FractionalSolution x2 = x.scaled(2.0);
      for (Vertex v : rep.x0) x2.x[v] = 0;
      for (Vertex c : skew_multicut(sk, x2)) result.push_back(c);
    }
  }
  sort_unique(result);
  ensure(is_multicut(mi, result), "downward multicut leaves a pair connected");
  if (report) *report = std::move(rep);
  return result;
}

}  // namespace chvd

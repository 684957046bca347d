#pragma once

#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <set>

#include "chordal.hpp"

namespace chvd {

struct FractionalSolution {
  std::vector<double> x;
  double tolerance = 1e-6;

  double operator[](Vertex v) const { return x.at(v); }
  double total() const {
    double s = 0;
    for (double v : x) s += v;
    return s;
  }
  double sum(const VertexList& s) const {
    double t = 0;
    for (Vertex v : s) t += x.at(v);
    return t;
  }
  FractionalSolution scaled(double f) const {
    FractionalSolution r = *this;
    for (double& v : r.x) v *= f;
    return r;
  }
};

// Threshold test with the fixed slack used for every "x >= tau" comparison.
inline bool at_least(double value, double tau) { return value >= tau - 1e-9; }

struct MulticutInstance {
  DiGraph d;
  std::vector<Edge> terminals;  // (source, sink) pairs
};

struct LpOptions {
  double tolerance = 1e-6;
  int max_rounds = 2000;
};

struct LpResult {
  FractionalSolution solution;
  std::vector<VertexList> constraints;  // constraint pool at the optimum
  std::vector<double> dual;             // packing certificate over the pool
  int rounds = 0;
};

namespace detail {

struct PackingSolution {
  std::vector<double> y;  // per column
  std::vector<double> x;  // per row (shadow prices)
};

// max 1'y  s.t.  sum_{j : i in col_j} y_j <= 1 for every row i, y >= 0.
inline PackingSolution solve_packing(int rows, const std::vector<VertexList>& cols) {
  const int m = static_cast<int>(cols.size());
  std::vector<int> row_id(rows, -1);
  std::vector<int> used;
  for (const auto& c : cols)
    for (Vertex v : c)
      if (row_id.at(v) < 0) {
        row_id[v] = 0;
        used.push_back(v);
      }
  std::sort(used.begin(), used.end());
  for (int i = 0; i < static_cast<int>(used.size()); ++i) row_id[used[i]] = i;
  const int r = static_cast<int>(used.size());
  const int w = m + r;
  std::vector<std::vector<double>> tab(r, std::vector<double>(w + 1, 0.0));
  for (int j = 0; j < m; ++j)
    for (Vertex v : cols[j]) tab[row_id[v]][j] = 1.0;
  for (int i = 0; i < r; ++i) {
    tab[i][m + i] = 1.0;
    tab[i][w] = 1.0;
  }
  std::vector<double> z(w, 0.0);
  for (int j = 0; j < m; ++j) z[j] = 1.0;
  std::vector<int> basis(r);
  for (int i = 0; i < r; ++i) basis[i] = m + i;

  const double eps = 1e-10;
  double last_obj = -1;
  double obj = 0;
  int stalled = 0;
  const long long max_pivots = 200000;
  for (long long it = 0;; ++it) {
    if (it > max_pivots) throw InvariantError("simplex pivot limit reached");
    bool bland = stalled > 50;
    int enter = -1;
    for (int j = 0; j < w; ++j)
      if (z[j] > eps && (enter < 0 || (!bland && z[j] > z[enter]))) {
        enter = j;
        if (bland) break;
      }
    if (enter < 0) break;
    int leave = -1;
    double best = 0;
    for (int i = 0; i < r; ++i)
      if (tab[i][enter] > eps) {
        double ratio = tab[i][w] / tab[i][enter];
        if (leave < 0 || ratio < best - 1e-12 || (ratio <= best + 1e-12 && basis[i] < basis[leave])) {
          leave = i;
          best = ratio;
        }
      }
    ensure(leave >= 0, "packing LP is unbounded");
    double piv = tab[leave][enter];
    for (double& a : tab[leave]) a /= piv;
    for (int i = 0; i < r; ++i) {
      if (i == leave || tab[i][enter] == 0.0) continue;
      double f = tab[i][enter];
      for (int j = 0; j <= w; ++j) tab[i][j] -= f * tab[leave][j];
    }
    double f = z[enter];
    for (int j = 0; j < w; ++j) z[j] -= f * tab[leave][j];
    obj += f * tab[leave][w];
    basis[leave] = enter;
    if (obj > last_obj + 1e-12) {
      last_obj = obj;
      stalled = 0;
    } else {
      ++stalled;
    }
  }
  PackingSolution out;
  out.y.assign(m, 0.0);
  for (int i = 0; i < r; ++i)
    if (basis[i] < m) out.y[basis[i]] = std::max(0.0, tab[i][w]);
  out.x.assign(rows, 0.0);
  for (int i = 0; i < r; ++i) {
    double v = -z[m + i];
    out.x[used[i]] = v < 1e-12 ? 0.0 : v;
  }
  return out;
}

struct Dijkstra {
  std::vector<double> dist;
  std::vector<int> prev;
};

// Vertex-weighted shortest paths from one source; the source's own weight is included.
template <class Next>
Dijkstra vertex_dijkstra(int n, Vertex s, const std::vector<double>& x, Next&& next) {
  Dijkstra d;
  d.dist.assign(n, std::numeric_limits<double>::infinity());
  d.prev.assign(n, -1);
  using Item = std::pair<double, Vertex>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  d.dist[s] = x[s];
  pq.push({d.dist[s], s});
  while (!pq.empty()) {
    auto [du, u] = pq.top();
    pq.pop();
    if (du > d.dist[u]) continue;
    next(u, [&](Vertex w) {
      double nd = du + x[w];
      if (nd < d.dist[w] - 1e-15) {
        d.dist[w] = nd;
        d.prev[w] = u;
        pq.push({nd, w});
      }
    });
  }
  return d;
}

inline VertexList trace_back(const Dijkstra& d, Vertex t) {
  VertexList p;
  for (Vertex v = t; v != -1; v = d.prev[v]) p.push_back(v);
  std::reverse(p.begin(), p.end());
  return p;
}

}  // namespace detail

// Violated holes, most violated first, at most limit of them.
inline std::vector<Hole> separate_chvd_all(const Graph& g, const FractionalSolution& x, std::size_t limit) {
  const int n = g.size();
  if (static_cast<int>(x.x.size()) != n) throw std::invalid_argument("solution size mismatch");
  std::map<VertexList, std::pair<double, Hole>> found;
  Mask interior(n, 0);
  for (Vertex v2 = 0; v2 < n; ++v2) {
    for (Vertex u = 0; u < n; ++u) interior[u] = 1;
    interior[v2] = 0;
    for (Vertex u : g.neighbors(v2)) interior[u] = 0;
    const auto& nb = g.neighbors(v2);
    for (Vertex v1 : nb) {
      auto dj = detail::vertex_dijkstra(n, v1, x.x, [&](Vertex u, auto&& relax) {
        for (Vertex w : g.neighbors(u))
          if (interior[w]) relax(w);
      });
      for (Vertex v3 : nb) {
        if (v3 <= v1 || g.adjacent(v1, v3)) continue;
        double best = std::numeric_limits<double>::infinity();
        Vertex via = -1;
        for (Vertex u : g.neighbors(v3))
          if (interior[u] && dj.dist[u] < best) {
            best = dj.dist[u];
            via = u;
          }
        if (via < 0) continue;
        double weight = best + x[v3] + x[v2];
        if (weight >= 1.0 - x.tolerance) continue;
        VertexList walk = detail::trace_back(dj, via);
        walk.push_back(v3);
        VertexList path = shortcut_walk(g, walk);
        Hole h;
        h.cycle.push_back(v2);
        h.cycle.insert(h.cycle.end(), path.begin(), path.end());
        double hw = x.sum(h.cycle);
        VertexList key = h.vertex_set();
        auto it = found.find(key);
        if (it == found.end()) found.emplace(key, std::make_pair(hw, h));
      }
    }
  }
  std::vector<std::pair<double, Hole>> all;
  for (auto& [k, v] : found) all.push_back(v);
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Hole> out;
  for (auto& [w, h] : all) {
    if (out.size() >= limit) break;
    out.push_back(h);
  }
  return out;
}

inline std::optional<Hole> separate_chvd(const Graph& g, const FractionalSolution& x) {
  auto v = separate_chvd_all(g, x, 1);
  if (v.empty()) return std::nullopt;
  return v.front();
}

inline std::vector<VertexList> separate_multicut_all(const MulticutInstance& inst, const FractionalSolution& x,
                                                     std::size_t limit) {
  const int n = inst.d.size();
  if (static_cast<int>(x.x.size()) != n) throw std::invalid_argument("solution size mismatch");
  std::map<Vertex, VertexList> by_source;
  for (auto [s, t] : inst.terminals) by_source[s].push_back(t);
  std::vector<std::pair<double, VertexList>> all;
  std::set<VertexList> seen;
  for (auto& [s, ts] : by_source) {
    auto dj = detail::vertex_dijkstra(n, s, x.x, [&](Vertex u, auto&& relax) {
      for (Vertex w : inst.d.out(u)) relax(w);
    });
    for (Vertex t : ts)
      if (dj.dist[t] < 1.0 - x.tolerance) {
        VertexList p = detail::trace_back(dj, t);
        if (seen.insert(p).second) all.emplace_back(dj.dist[t], p);
      }
  }
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<VertexList> out;
  for (auto& [w, p] : all) {
    if (out.size() >= limit) break;
    out.push_back(p);
  }
  return out;
}

inline std::optional<VertexList> separate_multicut(const MulticutInstance& inst, const FractionalSolution& x) {
  auto v = separate_multicut_all(inst, x, 1);
  if (v.empty()) return std::nullopt;
  return v.front();
}

namespace detail {

// Cutting-plane loop over a separation oracle returning vertex sets that must sum to one.
template <class Separate>
LpResult cutting_plane(int n, const LpOptions& opt, Separate&& separate) {
  LpResult res;
  res.solution.x.assign(n, 0.0);
  res.solution.tolerance = opt.tolerance;
  std::vector<VertexList> pool;
  std::deque<int> age;  // rounds since last tight, per constraint
  std::set<VertexList> in_pool;
  const std::size_t cap = std::max<std::size_t>(16, 10ULL * n * n);
  const std::size_t batch = std::max<std::size_t>(8, n);
  PackingSolution ps;
  for (int round = 0;; ++round) {
    if (round >= opt.max_rounds) throw std::runtime_error("cutting-plane round limit reached");
    auto cuts = separate(res.solution, batch);
    std::vector<VertexList> fresh;
    for (auto& c : cuts) {
      VertexList key = c;
      sort_unique(key);
      if (in_pool.insert(key).second) fresh.push_back(key);
    }
    if (cuts.empty()) break;
    ensure(!fresh.empty(), "separation returned a constraint already in the pool");
    for (auto& c : fresh) {
      pool.push_back(c);
      age.push_back(0);
    }
    if (pool.size() > cap) {
      std::vector<std::size_t> idx(pool.size());
      std::iota(idx.begin(), idx.end(), 0);
      std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return age[a] > age[b]; });
      std::vector<char> drop(pool.size(), 0);
      std::size_t excess = pool.size() - cap;
      for (std::size_t i : idx) {
        if (!excess) break;
        if (res.solution.sum(pool[i]) > 1.0 + 1e-7) {
          drop[i] = 1;
          --excess;
        }
      }
      std::vector<VertexList> np;
      std::deque<int> na;
      for (std::size_t i = 0; i < pool.size(); ++i)
        if (drop[i]) {
          in_pool.erase(pool[i]);
        } else {
          np.push_back(std::move(pool[i]));
          na.push_back(age[i]);
        }
      pool.swap(np);
      age.swap(na);
    }
    ps = solve_packing(n, pool);
    res.solution.x = ps.x;
    for (std::size_t i = 0; i < pool.size(); ++i)
      age[i] = res.solution.sum(pool[i]) <= 1.0 + 1e-7 ? 0 : age[i] + 1;
    res.rounds = round + 1;
  }
  res.constraints = pool;
  res.dual = pool.empty() ? std::vector<double>{} : ps.y;
  return res;
}

}  // namespace detail

inline LpResult solve_fractional(const Graph& g, const LpOptions& opt = {}) {
  return detail::cutting_plane(g.size(), opt, [&](const FractionalSolution& x, std::size_t limit) {
    std::vector<VertexList> out;
    for (auto& h : separate_chvd_all(g, x, limit)) out.push_back(h.cycle);
    return out;
  });
}

inline LpResult solve_fractional(const MulticutInstance& inst, const LpOptions& opt = {}) {
  for (auto [s, t] : inst.terminals)
    if (s < 0 || t < 0 || s >= inst.d.size() || t >= inst.d.size())
      throw std::out_of_range("terminal out of range");
  return detail::cutting_plane(inst.d.size(), opt, [&](const FractionalSolution& x, std::size_t limit) {
    return separate_multicut_all(inst, x, limit);
  });
}

}  // namespace chvd

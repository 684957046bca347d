#pragma once

#include <set>

#include "multicut.hpp"

namespace chvd {

struct ExactOptions {
  const Mask* undeletable = nullptr;
  long long node_limit = 20'000'000;
  bool cross_check = true;  // confirm by subset enumeration when n <= 14
};

namespace detail {

struct BranchSearch {
  int n;
  const ExactOptions& opt;
  long long nodes = 0;
  std::set<std::vector<std::uint64_t>> failed;
  Mask alive;
  VertexList chosen;

  BranchSearch(int n_, const ExactOptions& o) : n(n_), opt(o), alive(full_mask(n_)) {}

  std::vector<std::uint64_t> key() const {
    std::vector<std::uint64_t> k((n + 63) / 64, 0);
    for (Vertex v = 0; v < n; ++v)
      if (!alive[v]) k[v / 64] |= 1ULL << (v % 64);
    return k;
  }

  bool deletable(Vertex v) const { return !opt.undeletable || !(*opt.undeletable)[v]; }

  // `obstruction` returns the vertices of which one must go, or nullopt when solved.
  template <class Obstruction>
  bool run(int budget, Obstruction&& obstruction) {
    if (++nodes > opt.node_limit) throw std::runtime_error("exact search budget exhausted");
    auto obs = obstruction(alive);
    if (!obs) return true;
    if (budget == 0) return false;
    auto k = key();
    if (failed.count(k)) return false;
    for (Vertex v : *obs) {
      if (!deletable(v) || !alive[v]) continue;
      alive[v] = 0;
      chosen.push_back(v);
      if (run(budget - 1, obstruction)) return true;
      chosen.pop_back();
      alive[v] = 1;
    }
    failed.insert(std::move(k));
    return false;
  }
};

// Smallest solution of size <= k by iterative deepening, or nullopt.
template <class Obstruction>
std::optional<VertexList> deepen(int n, int k, const ExactOptions& opt, Obstruction&& obstruction) {
  if (k < 0) return std::nullopt;
  long long spent = 0;
  for (int b = 0; b <= std::min(k, n); ++b) {
    BranchSearch bs(n, opt);
    bs.nodes = spent;
    bool ok = bs.run(b, obstruction);
    spent = bs.nodes;
    if (ok) {
      VertexList s = bs.chosen;
      sort_unique(s);
      return s;
    }
  }
  return std::nullopt;
}

// Subsets of size <= max_size, by size then lexicographically, until pred holds.
template <class Pred>
std::optional<VertexList> enumerate_subsets(const VertexList& pool, int max_size, Pred&& pred) {
  const int m = static_cast<int>(pool.size());
  for (int size = 0; size <= std::min(max_size, m); ++size) {
    std::vector<int> idx(size);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
      VertexList s;
      for (int i : idx) s.push_back(pool[i]);
      if (pred(s)) return s;
      int i = size - 1;
      while (i >= 0 && idx[i] == m - size + i) --i;
      if (i < 0) break;
      ++idx[i];
      for (int j = i + 1; j < size; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  return std::nullopt;
}

inline bool hits_forced(const std::vector<Edge>& forced, const Mask& alive) {
  for (auto [a, b] : forced)
    if (alive[a] && alive[b]) return false;
  return true;
}

}  // namespace detail

// Brute force over vertex subsets; used as the reference for small graphs.
inline std::optional<VertexList> exact_chvd_by_enumeration(const Graph& g, int k, const std::vector<Edge>& forced = {},
                                                           const Mask* undeletable = nullptr) {
  VertexList pool;
  for (Vertex v = 0; v < g.size(); ++v)
    if (!undeletable || !(*undeletable)[v]) pool.push_back(v);
  return detail::enumerate_subsets(pool, k, [&](const VertexList& s) {
    Mask alive = full_mask(g.size());
    for (Vertex v : s) alive[v] = 0;
    return detail::hits_forced(forced, alive) && is_chordal(g, &alive);
  });
}

// Minimum deletion set of size <= k that makes G chordal and meets every forced pair.
inline std::optional<VertexList> exact_chvd_forced(const Graph& g, int k, const std::vector<Edge>& forced,
                                                   const ExactOptions& opt = {}) {
  auto obstruction = [&](const Mask& alive) -> std::optional<VertexList> {
    for (auto [a, b] : forced)
      if (alive[a] && alive[b]) return VertexList{a, b};
    if (auto h = shortest_hole(g, &alive)) return h->cycle;
    return std::nullopt;
  };
  auto res = detail::deepen(g.size(), k, opt, obstruction);
  if (opt.cross_check && g.size() <= 14) {
    int bound = res ? static_cast<int>(res->size()) : k;
    auto ref = exact_chvd_by_enumeration(g, bound, forced, opt.undeletable);
    if (res)
      ensure(ref && ref->size() == res->size(), "branching disagrees with enumeration");
    else
      ensure(!ref, "branching missed a solution found by enumeration");
  }
  return res;
}

inline std::optional<VertexList> exact_chvd(const Graph& g, int k, const ExactOptions& opt = {}) {
  return exact_chvd_forced(g, k, {}, opt);
}

// Size of a minimum solution, or -1 when the undeletable vertices make it impossible.
inline int chvd_optimum(const Graph& g, const ExactOptions& opt = {}) {
  auto s = exact_chvd(g, g.size(), opt);
  return s ? static_cast<int>(s->size()) : -1;
}

inline std::optional<VertexList> exact_multicut(const MulticutInstance& inst, int k, const ExactOptions& opt = {}) {
  auto obstruction = [&](const Mask& alive) -> std::optional<VertexList> {
    for (auto [s, t] : inst.terminals)
      if (auto p = bfs_dipath(inst.d, s, t, &alive)) return *p;
    return std::nullopt;
  };
  auto res = detail::deepen(inst.d.size(), k, opt, obstruction);
  if (opt.cross_check && inst.d.size() <= 14) {
    VertexList pool;
    for (Vertex v = 0; v < inst.d.size(); ++v)
      if (!opt.undeletable || !(*opt.undeletable)[v]) pool.push_back(v);
    int bound = res ? static_cast<int>(res->size()) : k;
    auto ref = detail::enumerate_subsets(pool, bound, [&](const VertexList& s) { return is_multicut(inst, s); });
    if (res)
      ensure(ref && ref->size() == res->size(), "multicut branching disagrees with enumeration");
    else
      ensure(!ref, "multicut branching missed a solution");
  }
  return res;
}

}  // namespace chvd

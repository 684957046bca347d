#pragma once

#include "chordal.hpp"
#include "rng.hpp"

namespace chvd {

struct GeneratorSpec {
  std::uint64_t seed = 1;
  int core = 10;          // vertices of the chordal core
  int tree_nodes = 6;     // nodes of the host tree
  int subtree_max = 3;    // largest subtree per core vertex
  int planted = 1;        // apex vertices that break chordality
  int noise = 2;          // extra random edges, each touching a planted vertex
  bool path_host = false; // host tree is a path, giving interval-like cores with long induced paths
};

struct Generated {
  Graph g;
  int k = 0;
  VertexList planted;
};

namespace detail {

// Random connected subtree of the host tree, given by adjacency lists.
inline std::vector<int> random_subtree(Rng& rng, const std::vector<std::vector<int>>& tree, int size) {
  std::vector<int> nodes{static_cast<int>(rng.below(tree.size()))};
  std::vector<char> in(tree.size(), 0);
  in[nodes[0]] = 1;
  while (static_cast<int>(nodes.size()) < size) {
    std::vector<int> frontier;
    for (int p : nodes)
      for (int q : tree[p])
        if (!in[q]) frontier.push_back(q);
    if (frontier.empty()) break;
    int q = rng.pick(frontier);
    in[q] = 1;
    nodes.push_back(q);
  }
  return nodes;
}

}  // namespace detail

// Chordal core from a subtree intersection model, plus planted vertices whose deletion restores chordality.
inline Generated generate(const GeneratorSpec& spec) {
  Rng rng(spec.seed);
  const int t = std::max(1, spec.tree_nodes);
  std::vector<std::vector<int>> tree(t);
  for (int i = 1; i < t; ++i) {
    int p = spec.path_host ? i - 1 : static_cast<int>(rng.below(i));
    tree[i].push_back(p);
    tree[p].push_back(i);
  }
  const int core = std::max(0, spec.core);
  std::vector<std::vector<char>> model(core, std::vector<char>(t, 0));
  for (int v = 0; v < core; ++v)
    for (int p : detail::random_subtree(rng, tree, rng.range(1, std::max(1, spec.subtree_max)))) model[v][p] = 1;
  const int n = core + std::max(0, spec.planted);
  Graph g(n);
  for (int u = 0; u < core; ++u)
    for (int v = u + 1; v < core; ++v)
      for (int p = 0; p < t; ++p)
        if (model[u][p] && model[v][p]) {
          g.add_edge(u, v);
          break;
        }
  VertexList planted;
  for (int a = core; a < n; ++a) {
    planted.push_back(a);
    // attach to both ends of a random induced path with at least two edges when one exists
    Vertex s = core > 0 ? static_cast<Vertex>(rng.below(core)) : -1;
    bool joined = false;
    if (s >= 0) {
      std::vector<int> dist(core, -1), par(core, -1);
      std::vector<Vertex> queue{s};
      dist[s] = 0;
      for (std::size_t i = 0; i < queue.size(); ++i)
        for (Vertex w : g.neighbors(queue[i]))
          if (w < core && dist[w] < 0) {
            dist[w] = dist[queue[i]] + 1;
            par[w] = queue[i];
            queue.push_back(w);
          }
      VertexList far;
      for (Vertex w = 0; w < core; ++w)
        if (dist[w] >= 2) far.push_back(w);
      if (!far.empty()) {
        Vertex e = rng.pick(far);
        g.add_edge(a, s);
        g.add_edge(a, e);
        joined = true;
      }
    }
    if (!joined && core > 0) g.add_edge(a, static_cast<Vertex>(rng.below(core)));
  }
  if (!planted.empty() && n > 1)
    for (int i = 0; i < spec.noise; ++i) {
      Vertex a = rng.pick(planted);
      Vertex b = static_cast<Vertex>(rng.below(n));
      if (a != b && !g.adjacent(a, b)) g.add_edge(a, b);
    }
  std::vector<Vertex> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  Graph h(n);
  for (auto [u, v] : g.edges()) h.add_edge(perm[u], perm[v]);
  Generated out;
  out.g = std::move(h);
  for (Vertex v : planted) out.planted.push_back(perm[v]);
  std::sort(out.planted.begin(), out.planted.end());
  out.k = static_cast<int>(out.planted.size());
  Mask rest = full_mask(n);
  for (Vertex v : out.planted) rest[v] = 0;
  ensure(is_chordal(out.g, &rest), "generator produced a non-chordal core");
  return out;
}

}  // namespace chvd

#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>
#include <span>
#include <utility>
#include <vector>

#include "kosz/graph.hpp"

namespace kosz {

inline constexpr EdgeId kNoEdge = std::numeric_limits<EdgeId>::max();

/// Rooted spanning tree of a Graph.
///
/// Per-vertex arrays describe the edge to the parent; the root is its own
/// parent and has kNoEdge / zero resistance. `order` lists vertices so that
/// parents precede children (BFS from the root).
struct SpanningTree {
  Vertex root = 0;
  std::vector<Vertex> parent;
  std::vector<double> parent_resistance;
  std::vector<EdgeId> parent_edge;
  std::vector<std::uint32_t> depth;
  std::vector<double> rdepth;
  std::vector<Vertex> order;
  std::vector<char> in_tree;  // indexed by graph edge id

  std::size_t num_vertices() const noexcept { return parent.size(); }
  bool is_tree_edge(EdgeId e) const { return in_tree[e] != 0; }
};

/// Roots the given n-1 graph edges at `root`. Throws if they do not form a
/// spanning tree of g.
inline SpanningTree make_spanning_tree(const Graph& g, std::span<const EdgeId> tree_edges, Vertex root) {
  const std::size_t n = g.num_vertices();
  if (root >= n) throw InvalidArgument("tree root out of range");
  if (tree_edges.size() + 1 != n) throw InvalidArgument("spanning tree needs exactly n-1 edges");

  std::vector<std::size_t> off(n + 1, 0);
  for (EdgeId id : tree_edges) {
    if (id >= g.num_edges()) throw InvalidArgument("tree edge id out of range");
    ++off[g.edge(id).u + 1];
    ++off[g.edge(id).v + 1];
  }
  std::partial_sum(off.begin(), off.end(), off.begin());
  std::vector<EdgeId> inc(2 * tree_edges.size());
  {
    std::vector<std::size_t> fill(off.begin(), off.end() - 1);
    for (EdgeId id : tree_edges) {
      inc[fill[g.edge(id).u]++] = id;
      inc[fill[g.edge(id).v]++] = id;
    }
  }

  SpanningTree t;
  t.root = root;
  t.parent.assign(n, root);
  t.parent_resistance.assign(n, 0.0);
  t.parent_edge.assign(n, kNoEdge);
  t.depth.assign(n, 0);
  t.rdepth.assign(n, 0.0);
  t.in_tree.assign(g.num_edges(), 0);
  t.order.reserve(n);

  std::vector<char> seen(n, 0);
  seen[root] = 1;
  t.order.push_back(root);
  for (std::size_t head = 0; head < t.order.size(); ++head) {
    const Vertex u = t.order[head];
    for (std::size_t i = off[u]; i < off[u + 1]; ++i) {
      const EdgeId id = inc[i];
      const Edge& e = g.edge(id);
      const Vertex v = e.other(u);
      if (seen[v]) continue;
      seen[v] = 1;
      t.parent[v] = u;
      t.parent_edge[v] = id;
      t.parent_resistance[v] = e.resistance();
      t.depth[v] = t.depth[u] + 1;
      t.rdepth[v] = t.rdepth[u] + e.resistance();
      t.in_tree[id] = 1;
      t.order.push_back(v);
    }
  }
  if (t.order.size() != n) throw InvalidArgument("tree edges do not span the graph");
  return t;
}

/// Structural check of every SpanningTree invariant against g.
inline bool is_valid_spanning_tree(const Graph& g, const SpanningTree& t) {
  const std::size_t n = g.num_vertices();
  if (t.parent.size() != n || t.order.size() != n || t.in_tree.size() != g.num_edges()) return false;
  if (t.root >= n || t.parent[t.root] != t.root || t.rdepth[t.root] != 0.0) return false;
  std::size_t tree_edges = 0;
  for (char c : t.in_tree) tree_edges += c != 0;
  if (tree_edges + 1 != n) return false;
  std::vector<char> placed(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const Vertex v = t.order[i];
    if (v >= n || placed[v]) return false;
    if (v != t.root) {
      if (!placed[t.parent[v]]) return false;  // parent must precede child
      const EdgeId id = t.parent_edge[v];
      if (id >= g.num_edges() || !t.in_tree[id]) return false;
      const Edge& e = g.edge(id);
      if (!((e.u == v && e.v == t.parent[v]) || (e.v == v && e.u == t.parent[v]))) return false;
      if (t.parent_resistance[v] != e.resistance()) return false;
      if (t.depth[v] != t.depth[t.parent[v]] + 1) return false;
      if (std::abs(t.rdepth[v] - (t.rdepth[t.parent[v]] + e.resistance())) > 1e-12 * (1.0 + t.rdepth[v]))
        return false;
    } else if (i != 0) {
      return false;
    }
    placed[v] = 1;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Lowest common ancestors: Euler tour + sparse-table range minimum.

class LcaIndex {
public:
  LcaIndex() = default;

  explicit LcaIndex(const SpanningTree& t) : depth_(t.depth) {
    const std::size_t n = t.num_vertices();
    // children in CSR form, ordered as in t.order
    std::vector<std::size_t> off(n + 1, 0);
    for (Vertex v : t.order)
      if (v != t.root) ++off[t.parent[v] + 1];
    std::partial_sum(off.begin(), off.end(), off.begin());
    std::vector<Vertex> kids(n ? n - 1 : 0);
    std::vector<std::size_t> fill(off.begin(), off.end() - 1);
    for (Vertex v : t.order)
      if (v != t.root) kids[fill[t.parent[v]]++] = v;

    euler_.reserve(2 * n);
    first_.assign(n, 0);
    std::vector<std::pair<Vertex, std::size_t>> stack{{t.root, off[t.root]}};
    first_[t.root] = 0;
    euler_.push_back(t.root);
    while (!stack.empty()) {
      auto& [u, next] = stack.back();
      if (next < off[u + 1]) {
        const Vertex c = kids[next++];
        first_[c] = static_cast<std::uint32_t>(euler_.size());
        euler_.push_back(c);
        stack.push_back({c, off[c]});
      } else {
        stack.pop_back();
        if (!stack.empty()) euler_.push_back(stack.back().first);
      }
    }

    const std::size_t len = euler_.size();
    const int levels = std::bit_width(len);
    table_.assign(levels, {});
    table_[0] = euler_;
    for (int j = 1; j < levels; ++j) {
      const std::size_t span = std::size_t{1} << j;
      table_[j].resize(len - span + 1);
      for (std::size_t i = 0; i + span <= len; ++i)
        table_[j][i] = shallower(table_[j - 1][i], table_[j - 1][i + span / 2]);
    }
  }

  Vertex operator()(Vertex u, Vertex v) const {
    std::size_t a = first_[u], b = first_[v];
    if (a > b) std::swap(a, b);
    const int j = std::bit_width(b - a + 1) - 1;
    return shallower(table_[j][a], table_[j][b + 1 - (std::size_t{1} << j)]);
  }

private:
  Vertex shallower(Vertex a, Vertex b) const { return depth_[b] < depth_[a] ? b : a; }

  std::vector<std::uint32_t> depth_;
  std::vector<Vertex> euler_;
  std::vector<std::uint32_t> first_;
  std::vector<std::vector<Vertex>> table_;
};

inline Vertex lca(const LcaIndex& index, Vertex u, Vertex v) { return index(u, v); }

// ---------------------------------------------------------------------------
// Constructions

namespace detail {

class UnionFind {
public:
  explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    std::size_t r = x;
    while (parent_[r] != r) r = parent_[r];
    while (parent_[x] != r) x = std::exchange(parent_[x], r);
    return r;
  }

  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

inline EdgeId find_edge(const Graph& g, Vertex a, Vertex b) {
  for (const Neighbor& nb : g.neighbors(a))
    if (nb.vertex == b) return nb.edge;
  throw InvalidArgument("no edge " + std::to_string(a) + "-" + std::to_string(b));
}

}  // namespace detail

/// Minimum spanning tree w.r.t. resistance 1/w (ties by edge id), rooted at 0.
inline SpanningTree kruskal_st(const Graph& g) {
  std::vector<EdgeId> ids(g.num_edges());
  std::iota(ids.begin(), ids.end(), 0);
  std::stable_sort(ids.begin(), ids.end(),
                   [&](EdgeId a, EdgeId b) { return g.edge(a).resistance() < g.edge(b).resistance(); });
  detail::UnionFind uf(g.num_vertices());
  std::vector<EdgeId> tree;
  tree.reserve(g.num_vertices());
  for (EdgeId id : ids) {
    if (uf.unite(g.edge(id).u, g.edge(id).v)) tree.push_back(id);
    if (tree.size() + 1 == g.num_vertices()) break;
  }
  if (tree.size() + 1 != g.num_vertices()) throw InvalidArgument("kruskal_st: graph is disconnected");
  return make_spanning_tree(g, tree, 0);
}

/// Shortest-path tree from `root` with edge length 1/w (binary heap).
inline SpanningTree dijkstra_st(const Graph& g, Vertex root = 0) {
  const std::size_t n = g.num_vertices();
  if (root >= n) throw InvalidArgument("dijkstra_st: root out of range");
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<EdgeId> via(n, kNoEdge);
  std::vector<char> done(n, 0);
  using Item = std::pair<double, Vertex>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[root] = 0.0;
  heap.push({0.0, root});
  while (!heap.empty()) {
    auto [d, u] = heap.top();
    heap.pop();
    if (done[u]) continue;
    done[u] = 1;
    for (const Neighbor& nb : g.neighbors(u)) {
      const double nd = d + g.edge(nb.edge).resistance();
      if (nd < dist[nb.vertex]) {
        dist[nb.vertex] = nd;
        via[nb.vertex] = nb.edge;
        heap.push({nd, nb.vertex});
      }
    }
  }
  std::vector<EdgeId> tree;
  tree.reserve(n);
  for (Vertex v = 0; v < n; ++v) {
    if (v == root) continue;
    if (via[v] == kNoEdge) throw InvalidArgument("dijkstra_st: graph is disconnected");
    tree.push_back(via[v]);
  }
  return make_spanning_tree(g, tree, root);
}

namespace detail {

// Rows [r0, r1) x columns [c0, c1) of a row-major grid with l columns.
inline void special_grid_edges(const Graph& g, std::size_t l, std::size_t r0, std::size_t r1, std::size_t c0,
                               std::size_t c1, std::vector<EdgeId>& out) {
  const std::size_t h = r1 - r0, w = c1 - c0;
  auto id = [l](std::size_t r, std::size_t c) { return static_cast<Vertex>(r * l + c); };
  if (h == 1) {
    for (std::size_t c = c0; c + 1 < c1; ++c) out.push_back(find_edge(g, id(r0, c), id(r0, c + 1)));
    return;
  }
  if (w == 1) {
    for (std::size_t r = r0; r + 1 < r1; ++r) out.push_back(find_edge(g, id(r, c0), id(r + 1, c0)));
    return;
  }
  const std::size_t rm = r0 + (h + 1) / 2;
  const std::size_t cm = c0 + (w + 1) / 2;
  special_grid_edges(g, l, r0, rm, c0, cm, out);
  special_grid_edges(g, l, r0, rm, cm, c1, out);
  special_grid_edges(g, l, rm, r1, c0, cm, out);
  special_grid_edges(g, l, rm, r1, cm, c1, out);
  // U opening upward: top-left down to bottom-left, across, up to top-right.
  out.push_back(find_edge(g, id(rm - 1, cm - 1), id(rm, cm - 1)));
  out.push_back(find_edge(g, id(rm, cm - 1), id(rm, cm)));
  out.push_back(find_edge(g, id(rm, cm), id(rm - 1, cm)));
}

}  // namespace detail

/// Recursive quadrant tree for the k x l grid `g` (as built by grid_graph,
/// possibly reweighted). Rooted at the top-left quadrant's corner next to the
/// grid center.
inline SpanningTree special_grid_st(const Graph& g, std::size_t k, std::size_t l) {
  if (k == 0 || l == 0 || k * l < 2) throw InvalidArgument("special_grid_st: k*l must be >= 2");
  if (g.num_vertices() != k * l) throw InvalidArgument("special_grid_st: graph is not a k x l grid");
  std::vector<EdgeId> tree;
  tree.reserve(k * l);
  detail::special_grid_edges(g, l, 0, k, 0, l, tree);
  Vertex root = 0;
  if (k > 1 && l > 1) root = static_cast<Vertex>(((k + 1) / 2 - 1) * l + (l + 1) / 2 - 1);
  return make_spanning_tree(g, tree, root);
}

inline SpanningTree special_grid_st(std::size_t k, std::size_t l) { return special_grid_st(grid_graph(k, l), k, l); }

// ---------------------------------------------------------------------------
// Stretch

struct StretchReport {
  std::vector<double> per_edge;
  double total = 0.0;
  double average = 0.0;
};

/// st(e) = (sum of tree-path weights between e's endpoints) / w_e.
inline StretchReport stretch(const Graph& g, const SpanningTree& t, const LcaIndex& index) {
  if (t.num_vertices() != g.num_vertices() || t.in_tree.size() != g.num_edges())
    throw InvalidArgument("stretch: tree does not belong to graph");
  std::vector<double> wdepth(g.num_vertices(), 0.0);
  for (Vertex v : t.order)
    if (v != t.root) wdepth[v] = wdepth[t.parent[v]] + g.edge(t.parent_edge[v]).w;

  StretchReport rep;
  rep.per_edge.resize(g.num_edges());
  for (EdgeId id = 0; id < g.num_edges(); ++id) {
    const Edge& e = g.edge(id);
    if (t.is_tree_edge(id)) {
      rep.per_edge[id] = 1.0;
    } else {
      const Vertex a = index(e.u, e.v);
      rep.per_edge[id] = (wdepth[e.u] + wdepth[e.v] - 2.0 * wdepth[a]) / e.w;
    }
    rep.total += rep.per_edge[id];
  }
  rep.average = g.num_edges() ? rep.total / static_cast<double>(g.num_edges()) : 0.0;
  return rep;
}

inline StretchReport stretch(const Graph& g, const SpanningTree& t) {
  if (!is_valid_spanning_tree(g, t)) throw InvalidArgument("stretch: not a spanning tree of the graph");
  return stretch(g, t, LcaIndex(t));
}

}  // namespace kosz

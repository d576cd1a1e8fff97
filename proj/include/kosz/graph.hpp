#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <unordered_set>
#include <utility>
#include <vector>

#include "kosz/error.hpp"

namespace kosz {

using Vertex = std::uint32_t;
using EdgeId = std::uint32_t;

/// Undirected weighted edge; the weight is a conductance, the resistance is 1/w.
struct Edge {
  Vertex u;
  Vertex v;
  double w;

  double resistance() const noexcept { return 1.0 / w; }
  Vertex other(Vertex x) const noexcept { return x == u ? v : u; }
};

struct Neighbor {
  Vertex vertex;
  EdgeId edge;
};

/// Immutable simple undirected graph with positive conductances.
///
/// Edges are addressed by id 0..m-1; each vertex keeps a compressed list of
/// (neighbor, edge id) pairs so both matrix-free Laplacian products and
/// per-edge flow bookkeeping are cheap.
class Graph {
public:
  Graph() = default;

  Graph(std::size_t n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(edges_.size() * 2);
    for (const Edge& e : edges_) {
      if (e.u >= n_ || e.v >= n_) throw InvalidArgument("edge endpoint out of range");
      if (e.u == e.v) throw InvalidArgument("self-loop at vertex " + std::to_string(e.u));
      if (!(e.w > 0.0) || !std::isfinite(e.w)) throw InvalidArgument("edge weight must be positive and finite");
      if (!seen.insert(key(e.u, e.v)).second)
        throw InvalidArgument("parallel edge " + std::to_string(e.u) + "-" + std::to_string(e.v));
    }
    offsets_.assign(n_ + 1, 0);
    for (const Edge& e : edges_) {
      ++offsets_[e.u + 1];
      ++offsets_[e.v + 1];
    }
    std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
    adjacency_.resize(2 * edges_.size());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (EdgeId id = 0; id < edges_.size(); ++id) {
      const Edge& e = edges_[id];
      adjacency_[fill[e.u]++] = {e.v, id};
      adjacency_[fill[e.v]++] = {e.u, id};
    }
  }

  std::size_t num_vertices() const noexcept { return n_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }

  const Edge& edge(EdgeId id) const { return edges_[id]; }
  std::span<const Edge> edges() const noexcept { return edges_; }

  std::span<const Neighbor> neighbors(Vertex u) const {
    return {adjacency_.data() + offsets_[u], adjacency_.data() + offsets_[u + 1]};
  }

  std::size_t degree(Vertex u) const { return offsets_[u + 1] - offsets_[u]; }

  double weighted_degree(Vertex u) const {
    double d = 0.0;
    for (const Neighbor& nb : neighbors(u)) d += edges_[nb.edge].w;
    return d;
  }

  /// Returns a copy with the same topology and the given per-edge weights.
  Graph with_weights(std::span<const double> w) const {
    if (w.size() != edges_.size()) throw InvalidArgument("weight vector size mismatch");
    std::vector<Edge> es(edges_);
    for (std::size_t i = 0; i < es.size(); ++i) es[i].w = w[i];
    return Graph(n_, std::move(es));
  }

  friend bool operator==(const Graph& a, const Graph& b) {
    if (a.n_ != b.n_ || a.edges_.size() != b.edges_.size()) return false;
    for (std::size_t i = 0; i < a.edges_.size(); ++i) {
      const Edge& x = a.edges_[i];
      const Edge& y = b.edges_[i];
      if (x.u != y.u || x.v != y.v || x.w != y.w) return false;
    }
    return true;
  }

private:
  static std::uint64_t key(Vertex a, Vertex b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | b;
  }

  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Neighbor> adjacency_;
};

// ---------------------------------------------------------------------------
// Generators

/// k x l lattice, row-major vertex ids (r * l + c), unit weights.
inline Graph grid_graph(std::size_t k, std::size_t l) {
  if (k == 0 || l == 0 || k * l < 2) throw InvalidArgument("grid needs k*l >= 2");
  std::vector<Edge> es;
  es.reserve(k * (l - 1) + l * (k - 1));
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t c = 0; c < l; ++c) {
      auto id = static_cast<Vertex>(r * l + c);
      if (c + 1 < l) es.push_back({id, id + 1, 1.0});
      if (r + 1 < k) es.push_back({id, static_cast<Vertex>(id + l), 1.0});
    }
  }
  return Graph(k * l, std::move(es));
}

/// Barabasi-Albert preferential attachment seeded with a k-clique.
/// Every later vertex attaches to k distinct existing vertices, each picked
/// with probability proportional to its current degree.
inline Graph barabasi_albert(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 1 || k >= n) throw InvalidArgument("barabasi_albert needs 1 <= k < n");
  std::mt19937_64 rng(seed);
  std::vector<Edge> es;
  es.reserve(k * (k - 1) / 2 + k * (n - k));
  // Each endpoint occurrence goes into the urn, so a uniform draw from it is
  // degree-proportional.
  std::vector<Vertex> urn;
  urn.reserve(2 * es.capacity());
  for (Vertex a = 0; a < k; ++a) {
    for (Vertex b = a + 1; b < k; ++b) {
      es.push_back({a, b, 1.0});
      urn.push_back(a);
      urn.push_back(b);
    }
  }
  std::vector<Vertex> picked;
  std::vector<char> taken(n, 0);
  for (auto t = static_cast<Vertex>(k); t < n; ++t) {
    picked.clear();
    while (picked.size() < k) {
      Vertex cand;
      if (urn.empty()) {
        cand = static_cast<Vertex>(std::uniform_int_distribution<std::size_t>(0, t - 1)(rng));
      } else {
        cand = urn[std::uniform_int_distribution<std::size_t>(0, urn.size() - 1)(rng)];
      }
      if (taken[cand]) continue;
      taken[cand] = 1;
      picked.push_back(cand);
    }
    for (Vertex p : picked) {
      taken[p] = 0;
      es.push_back({p, t, 1.0});
      urn.push_back(p);
      urn.push_back(t);
    }
  }
  return Graph(n, std::move(es));
}

/// Redraws every edge weight i.i.d. uniform in [lo, hi), in edge-id order.
inline Graph randomize_weights(const Graph& g, double lo, double hi, std::uint64_t seed) {
  if (!(lo > 0.0)) throw InvalidArgument("randomize_weights needs lo > 0");
  if (!(hi > lo)) throw InvalidArgument("randomize_weights needs hi > lo");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> w(g.num_edges());
  for (double& x : w) {
    x = dist(rng);
    if (x >= hi) x = std::nextafter(hi, lo);
  }
  return g.with_weights(w);
}

// ---------------------------------------------------------------------------
// Laplacian operators

// Flops charged per Laplacian product: one SpMV-equivalent = 4m + n.
inline std::uint64_t spmv_flops(const Graph& g) {
  return 4 * static_cast<std::uint64_t>(g.num_edges()) + g.num_vertices();
}

/// y = L x with L = D - W, i.e. (Lx)_u = sum_v w_uv (x_u - x_v).
inline void laplacian_apply(const Graph& g, std::span<const double> x, std::span<double> y,
                            OpCounters* counters = nullptr) {
  if (x.size() != g.num_vertices() || y.size() != g.num_vertices())
    throw InvalidArgument("laplacian_apply: dimension mismatch");
  std::fill(y.begin(), y.end(), 0.0);
  for (const Edge& e : g.edges()) {
    const double cur = e.w * (x[e.u] - x[e.v]);
    y[e.u] += cur;
    y[e.v] -= cur;
  }
  if (counters) counters->flops += spmv_flops(g);
}

inline std::vector<double> laplacian_apply(const Graph& g, std::span<const double> x,
                                           OpCounters* counters = nullptr) {
  std::vector<double> y(g.num_vertices());
  laplacian_apply(g, x, y, counters);
  return y;
}

inline double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double a : v) s += a * a;
  return std::sqrt(s);
}

/// ||b - Lx|| / ||b||.
inline double relative_residual(const Graph& g, std::span<const double> b, std::span<const double> x,
                                OpCounters* counters = nullptr) {
  if (b.size() != g.num_vertices() || x.size() != g.num_vertices())
    throw InvalidArgument("relative_residual: dimension mismatch");
  const double nb = norm2(b);
  if (nb == 0.0) throw InvalidArgument("relative_residual: b must be nonzero");
  std::vector<double> r = laplacian_apply(g, x, counters);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  if (counters) counters->flops += 3 * r.size();
  return norm2(r) / nb;
}

/// sum over edges of w_uv (x_u - x_v)^2.
inline double quadratic_form(const Graph& g, std::span<const double> x) {
  if (x.size() != g.num_vertices()) throw InvalidArgument("quadratic_form: dimension mismatch");
  double s = 0.0;
  for (const Edge& e : g.edges()) {
    const double d = x[e.u] - x[e.v];
    s += e.w * d * d;
  }
  return s;
}

inline bool is_connected(const Graph& g) {
  const std::size_t n = g.num_vertices();
  if (n == 0) return false;
  std::vector<char> seen(n, 0);
  std::vector<Vertex> queue{0};
  seen[0] = 1;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    for (const Neighbor& nb : g.neighbors(queue[head])) {
      if (!seen[nb.vertex]) {
        seen[nb.vertex] = 1;
        queue.push_back(nb.vertex);
      }
    }
  }
  return queue.size() == n;
}

/// Shifts v so its entries sum to zero.
inline void remove_mean(std::span<double> v) {
  if (v.empty()) return;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  for (double& a : v) a -= mean;
}

}  // namespace kosz

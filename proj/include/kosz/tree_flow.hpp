#pragma once

#include <concepts>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "kosz/spanning_tree.hpp"

namespace kosz {

// Flow on the edges of a rooted spanning tree. The flow value of vertex v
// lives on the edge v -> parent(v) and is positive when it runs toward the
// root.
//
//   query(u)          = sum over e on P(u, root) of f(e) r_e
//   update(u, a)      : f(e) += a on P(u, root)
//   query_pair(u, v)  = query(u) - query(v)    (potential drop from u to v)
//   update_pair(u,v,a): push a units from u to v along the tree path
template <class F>
concept TreeFlow = requires(F f, const F cf, Vertex u, double a, std::span<const double> flows) {
  { cf.query(u) } -> std::convertible_to<double>;
  { f.update(u, a) };
  { cf.query_pair(u, u) } -> std::convertible_to<double>;
  { f.update_pair(u, u, a) };
  { cf.tree_flows() } -> std::convertible_to<std::vector<double>>;
  { f.assign(flows) };
  { cf.counters() } -> std::convertible_to<OpCounters>;
};

/// Stores f directly per tree edge; operations walk the tree. Two-vertex
/// operations only touch the u-v path.
class NaiveTreeFlow {
public:
  explicit NaiveTreeFlow(const SpanningTree& t)
      : parent_(t.parent), resistance_(t.parent_resistance), depth_(t.depth), order_(t.order),
        root_(t.root), flow_(t.num_vertices(), 0.0) {}

  double query(Vertex u) const {
    double s = 0.0;
    for (; u != root_; u = parent_[u]) {
      s += flow_[u] * resistance_[u];
      ++counters_.tree_ops;
      counters_.flops += 2;
    }
    return s;
  }

  void update(Vertex u, double alpha) {
    for (; u != root_; u = parent_[u]) {
      flow_[u] += alpha;
      ++counters_.tree_ops;
      ++counters_.flops;
    }
  }

  double query_pair(Vertex u, Vertex v) const {
    double s = 0.0;
    while (u != v) {
      if (depth_[u] >= depth_[v]) {
        s += flow_[u] * resistance_[u];
        u = parent_[u];
      } else {
        s -= flow_[v] * resistance_[v];
        v = parent_[v];
      }
      ++counters_.tree_ops;
      counters_.flops += 2;
    }
    return s;
  }

  void update_pair(Vertex u, Vertex v, double alpha) {
    while (u != v) {
      if (depth_[u] >= depth_[v]) {
        flow_[u] += alpha;
        u = parent_[u];
      } else {
        flow_[v] -= alpha;
        v = parent_[v];
      }
      ++counters_.tree_ops;
      ++counters_.flops;
    }
  }

  std::vector<double> tree_flows() const {
    counters_.tree_ops += flow_.size();
    return flow_;
  }

  /// Replaces the whole flow; f[v] is the flow on v -> parent(v).
  void assign(std::span<const double> f) {
    flow_.assign(f.begin(), f.end());
    flow_[root_] = 0.0;
    counters_.tree_ops += flow_.size();
  }

  const OpCounters& counters() const noexcept { return counters_; }

private:
  std::vector<Vertex> parent_;
  std::vector<double> resistance_;
  std::vector<std::uint32_t> depth_;
  std::vector<Vertex> order_;
  Vertex root_;
  std::vector<double> flow_;
  mutable OpCounters counters_;
};

/// O(log n) per operation, O(n log n) space.
///
/// Write a_w for the net amount injected at w by update(w, .). Then
/// f(v -> parent) = sum of a over the subtree of v and
///
///   query(u) = sum_w a_w * rdepth(lca(u, w)).
///
/// A centroid decomposition splits this bilinear sum: for the centroid c of a
/// component and u, w on different sides of c, lca(u, w) is either c (both
/// below c) or lca(x, c) for whichever of u, w lies in the branch holding c's
/// parent. Each centroid keeps three running sums (mass below, mass in each
/// lower branch, depth-weighted mass above), so query is a dot product of the
/// per-vertex coefficient row with those sums and update is a sparse add.
class LogTreeFlow {
public:
  explicit LogTreeFlow(const SpanningTree& t)
      : n_(t.num_vertices()), parent_(t.parent), order_(t.order), root_(t.root), mass_(n_, 0.0) {
    decompose(t);
    fill_coefficients(t);
    down_.assign(n_, 0.0);
    up_.assign(n_, 0.0);
    branch_.assign(n_, 0.0);
  }

  double query(Vertex u) const {
    const double* row = coef_.data() + offset_[u];
    Vertex c = u;
    double s = row[level_[c]] * down_[c] + up_[c];
    counters_.flops += 2;
    ++counters_.tree_ops;
    for (Vertex prev = c; (c = cparent_[prev]) != kNone; prev = c) {
      const double k = row[level_[c]];
      if (upper_branch_[prev]) {
        s += k * down_[c];
        counters_.flops += 2;
      } else {
        s += k * (down_[c] - branch_[prev]) + up_[c];
        counters_.flops += 4;
      }
      ++counters_.tree_ops;
    }
    return s;
  }

  void update(Vertex w, double alpha) {
    mass_[w] += alpha;
    const double* row = coef_.data() + offset_[w];
    Vertex c = w;
    down_[c] += alpha;
    counters_.flops += 2;
    ++counters_.tree_ops;
    for (Vertex prev = c; (c = cparent_[prev]) != kNone; prev = c) {
      if (upper_branch_[prev]) {
        up_[c] += alpha * row[level_[c]];
      } else {
        down_[c] += alpha;
        branch_[prev] += alpha;
      }
      counters_.flops += 2;
      ++counters_.tree_ops;
    }
  }

  double query_pair(Vertex u, Vertex v) const {
    ++counters_.flops;
    return query(u) - query(v);
  }

  void update_pair(Vertex u, Vertex v, double alpha) {
    if (u == v) return;
    update(u, alpha);
    update(v, -alpha);
  }

  std::vector<double> tree_flows() const {
    std::vector<double> f(mass_);
    for (std::size_t i = n_; i-- > 1;) {
      const Vertex v = order_[i];
      f[parent_[v]] += f[v];
    }
    f[root_] = 0.0;
    counters_.tree_ops += n_;
    counters_.flops += n_;
    return f;
  }

  void assign(std::span<const double> f) {
    std::vector<double> mass(f.begin(), f.end());
    mass[root_] = 0.0;
    for (Vertex v : order_)
      if (v != root_) mass[parent_[v]] -= f[v];
    std::fill(down_.begin(), down_.end(), 0.0);
    std::fill(up_.begin(), up_.end(), 0.0);
    std::fill(branch_.begin(), branch_.end(), 0.0);
    std::fill(mass_.begin(), mass_.end(), 0.0);
    for (Vertex v = 0; v < n_; ++v)
      if (mass[v] != 0.0) update(v, mass[v]);
  }

  const OpCounters& counters() const noexcept { return counters_; }

  /// Number of centroid levels above u (inclusive); the per-operation cost.
  std::size_t levels(Vertex u) const { return level_[u] + 1; }

private:
  static constexpr Vertex kNone = std::numeric_limits<Vertex>::max();
  static constexpr std::uint32_t kUnassigned = std::numeric_limits<std::uint32_t>::max();

  void decompose(const SpanningTree& t) {
    // undirected tree adjacency
    adj_off_.assign(n_ + 1, 0);
    for (Vertex v = 0; v < n_; ++v)
      if (v != root_) {
        ++adj_off_[v + 1];
        ++adj_off_[t.parent[v] + 1];
      }
    std::partial_sum(adj_off_.begin(), adj_off_.end(), adj_off_.begin());
    adj_.resize(adj_off_[n_]);
    std::vector<std::size_t> fill(adj_off_.begin(), adj_off_.end() - 1);
    for (Vertex v = 0; v < n_; ++v)
      if (v != root_) {
        adj_[fill[v]++] = t.parent[v];
        adj_[fill[t.parent[v]]++] = v;
      }

    level_.assign(n_, kUnassigned);
    cparent_.assign(n_, kNone);
    upper_branch_.assign(n_, 0);

    struct Pending {
      Vertex start;
      Vertex centroid_parent;
      std::uint32_t level;
      bool upper;
    };
    std::vector<Pending> stack{{root_, kNone, 0, false}};
    std::vector<Vertex> comp, bfs_parent(n_), size(n_), heaviest(n_);
    while (!stack.empty()) {
      const Pending p = stack.back();
      stack.pop_back();

      comp.clear();
      comp.push_back(p.start);
      bfs_parent[p.start] = kNone;
      for (std::size_t h = 0; h < comp.size(); ++h) {
        const Vertex x = comp[h];
        for (std::size_t i = adj_off_[x]; i < adj_off_[x + 1]; ++i) {
          const Vertex y = adj_[i];
          if (y == bfs_parent[x] || level_[y] != kUnassigned) continue;
          bfs_parent[y] = x;
          comp.push_back(y);
        }
      }
      for (Vertex x : comp) {
        size[x] = 1;
        heaviest[x] = 0;
      }
      for (std::size_t h = comp.size(); h-- > 1;) {
        const Vertex x = comp[h];
        size[bfs_parent[x]] += size[x];
        heaviest[bfs_parent[x]] = std::max(heaviest[bfs_parent[x]], size[x]);
      }
      const auto total = static_cast<Vertex>(comp.size());
      Vertex c = p.start;
      for (Vertex x : comp) {
        if (std::max(heaviest[x], total - size[x]) <= total / 2) {
          c = x;
          break;
        }
      }
      level_[c] = p.level;
      cparent_[c] = p.centroid_parent;
      upper_branch_[c] = p.upper;
      for (std::size_t i = adj_off_[c]; i < adj_off_[c + 1]; ++i) {
        const Vertex y = adj_[i];
        if (level_[y] != kUnassigned) continue;
        stack.push_back({y, c, p.level + 1, c != root_ && y == t.parent[c]});
      }
    }
  }

  // coef row of w, entry for the centroid c at level l: min rdepth on the
  // tree path c..w, which is rdepth(lca(c, w)).
  void fill_coefficients(const SpanningTree& t) {
    offset_.resize(n_ + 1);
    offset_[0] = 0;
    for (Vertex v = 0; v < n_; ++v) offset_[v + 1] = offset_[v] + level_[v] + 1;
    coef_.assign(offset_[n_], 0.0);

    std::vector<Vertex> queue, from(n_);
    std::vector<double> lowest(n_);
    for (Vertex c = 0; c < n_; ++c) {
      const std::uint32_t lc = level_[c];
      queue.clear();
      queue.push_back(c);
      from[c] = kNone;
      lowest[c] = t.rdepth[c];
      for (std::size_t h = 0; h < queue.size(); ++h) {
        const Vertex x = queue[h];
        coef_[offset_[x] + lc] = lowest[x];
        for (std::size_t i = adj_off_[x]; i < adj_off_[x + 1]; ++i) {
          const Vertex y = adj_[i];
          if (y == from[x] || level_[y] <= lc) continue;
          from[y] = x;
          lowest[y] = std::min(lowest[x], t.rdepth[y]);
          queue.push_back(y);
        }
      }
    }
    adj_.clear();
    adj_.shrink_to_fit();
    adj_off_.clear();
    adj_off_.shrink_to_fit();
  }

  std::size_t n_;
  std::vector<Vertex> parent_;
  std::vector<Vertex> order_;
  Vertex root_;

  std::vector<std::size_t> adj_off_;
  std::vector<Vertex> adj_;

  std::vector<std::uint32_t> level_;
  std::vector<Vertex> cparent_;
  std::vector<char> upper_branch_;
  std::vector<std::size_t> offset_;
  std::vector<double> coef_;

  std::vector<double> mass_;
  std::vector<double> down_;    // mass in c's component outside its upper branch
  std::vector<double> up_;      // sum of a_w * rdepth(lca(w, c)) over c's upper branch
  std::vector<double> branch_;  // branch_[c']: mass in c' 's component (c' below its centroid parent)
  mutable OpCounters counters_;
};

/// Sum of resistances on the tree path u..v, probed through the flow
/// structure; the flow is left as it was (up to rounding).
template <TreeFlow F>
double tree_path_resistance(F& flow, Vertex u, Vertex v) {
  const double before = flow.query_pair(u, v);
  flow.update_pair(u, v, 1.0);
  const double after = flow.query_pair(u, v);
  flow.update_pair(u, v, -1.0);
  return after - before;
}

static_assert(TreeFlow<NaiveTreeFlow>);
static_assert(TreeFlow<LogTreeFlow>);

}  // namespace kosz

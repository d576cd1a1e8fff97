#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <vector>

#include "kosz/spanning_tree.hpp"

namespace kosz {

/// Parameters of the star-decomposition recursion. Edge lengths are
/// resistances 1/w and cut costs are conductances w.
struct ElkinParams {
  double ball_delta = 1.0 / 3.0;
  /// Cone width factor; <= 0 selects 1 / (2 log_{4/3}(m + 32)).
  double cone_beta = 0.0;
};

namespace detail {

// Working state shared by every recursion step. Vertices of the part being
// decomposed carry label == current part; everything is reset lazily through
// the touched lists.
class StarDecomposer {
public:
  StarDecomposer(const Graph& g, const ElkinParams& params)
      : g_(g),
        delta_(params.ball_delta),
        label_(g.num_vertices(), 0),
        dist_(g.num_vertices(), kInf),
        pred_(g.num_vertices(), 0),
        pred_edge_(g.num_vertices(), kNoEdge),
        state_(g.num_vertices(), kFree),
        cdist_(g.num_vertices(), kInf) {
    const double m = static_cast<double>(g.num_edges());
    beta_ = params.cone_beta > 0.0 ? params.cone_beta : 1.0 / (2.0 * std::log(m + 32.0) / std::log(4.0 / 3.0));
  }

  std::vector<EdgeId> run(Vertex center) {
    std::vector<EdgeId> tree;
    tree.reserve(g_.num_vertices());
    std::vector<Vertex> all(g_.num_vertices());
    for (Vertex v = 0; v < all.size(); ++v) all[v] = v;
    std::uint32_t next_label = 1;
    for (Vertex v : all) label_[v] = next_label;
    std::vector<Work> stack;
    stack.push_back({std::move(all), center, next_label++});

    while (!stack.empty()) {
      Work w = std::move(stack.back());
      stack.pop_back();
      if (w.vertices.size() == 1) continue;
      if (w.vertices.size() == 2) {
        const Vertex other = w.vertices[0] == w.center ? w.vertices[1] : w.vertices[0];
        tree.push_back(find_edge(g_, w.center, other));
        continue;
      }
      decompose(w, tree, stack, next_label);
    }
    return tree;
  }

private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();
  enum : std::uint8_t { kFree = 0, kBall = 1, kCone = 2, kDone = 3 };

  struct Work {
    std::vector<Vertex> vertices;
    Vertex center;
    std::uint32_t label;
  };

  using Item = std::pair<double, Vertex>;
  using MinHeap = std::priority_queue<Item, std::vector<Item>, std::greater<>>;

  void decompose(Work& w, std::vector<EdgeId>& tree, std::vector<Work>& stack, std::uint32_t& next_label) {
    const std::uint32_t part = w.label;

    // Shortest-path distances from the center inside the part.
    std::vector<Vertex> settled;
    settled.reserve(w.vertices.size());
    std::size_t part_edges2 = 0;
    {
      MinHeap heap;
      dist_[w.center] = 0.0;
      pred_[w.center] = w.center;
      pred_edge_[w.center] = kNoEdge;
      heap.push({0.0, w.center});
      while (!heap.empty()) {
        auto [d, u] = heap.top();
        heap.pop();
        if (d > dist_[u] || state_[u] == kDone) continue;
        state_[u] = kDone;
        settled.push_back(u);
        for (const Neighbor& nb : g_.neighbors(u)) {
          if (label_[nb.vertex] != part) continue;
          ++part_edges2;
          const double nd = d + g_.edge(nb.edge).resistance();
          if (nd < dist_[nb.vertex]) {
            dist_[nb.vertex] = nd;
            pred_[nb.vertex] = u;
            pred_edge_[nb.vertex] = nb.edge;
            heap.push({nd, nb.vertex});
          }
        }
      }
      for (Vertex v : settled) state_[v] = kFree;
    }
    const double part_m = static_cast<double>(part_edges2 / 2);
    const double radius = dist_[settled.back()];
    const double logm = std::log2(part_m + 1.0);

    // Ball cut: grow from delta*radius until the boundary is cheap enough.
    double boundary = 0.0;
    double volume = 0.0;
    std::size_t taken = 0;
    auto add_to_ball = [&](Vertex v) {
      state_[v] = kBall;
      for (const Neighbor& nb : g_.neighbors(v)) {
        if (label_[nb.vertex] != part) continue;
        if (state_[nb.vertex] == kBall) {
          boundary -= g_.edge(nb.edge).w;
        } else {
          boundary += g_.edge(nb.edge).w;
          volume += 1.0;
        }
      }
      ++taken;
    };
    auto take_group = [&]() {
      const double d = dist_[settled[taken]];
      while (taken < settled.size() && dist_[settled[taken]] == d) add_to_ball(settled[taken]);
    };
    const double min_radius = delta_ * radius;
    while (taken < settled.size() && dist_[settled[taken]] <= min_radius) take_group();
    const double ball_scale = logm / ((1.0 - 2.0 * delta_) * radius);
    while (taken < settled.size() && boundary > (volume + 1.0) * ball_scale) {
      // never swallow the farthest layer; the part must shrink
      if (dist_[settled[taken]] >= radius) break;
      take_group();
    }

    std::vector<Vertex> ball(settled.begin(), settled.begin() + static_cast<std::ptrdiff_t>(taken));

    // Shell vertices, in distance order, anchor the cones.
    std::vector<Vertex> shell;
    for (std::size_t i = taken; i < settled.size(); ++i) {
      const Vertex v = settled[i];
      if (state_[pred_[v]] == kBall) shell.push_back(v);
    }

    const double cone_width = beta_ * radius / 2.0;
    std::vector<std::vector<Vertex>> cones;
    std::vector<Vertex> anchors;
    for (Vertex x : shell) {
      if (state_[x] != kFree) continue;
      cones.push_back(cone_cut(x, part, part_m, cone_width));
      tree.push_back(pred_edge_[x]);
      anchors.push_back(x);
    }

    // Reset per-part scratch and relabel the pieces for recursion.
    for (Vertex v : settled) {
      dist_[v] = kInf;
      state_[v] = kFree;
    }
    const std::uint32_t ball_label = next_label++;
    for (Vertex v : ball) label_[v] = ball_label;
    stack.push_back({std::move(ball), w.center, ball_label});
    for (std::size_t i = 0; i < cones.size(); ++i) {
      const std::uint32_t lbl = next_label++;
      for (Vertex v : cones[i]) label_[v] = lbl;
      stack.push_back({std::move(cones[i]), anchors[i], lbl});
    }
  }

  // Grows a cone around x in the part minus the ball and earlier cones.
  // Edges along the center's shortest-path tree are free; other edges cost
  // their slack len(u,v) + d(u) - d(v).
  std::vector<Vertex> cone_cut(Vertex x, std::uint32_t part, double part_m, double width) {
    std::vector<Vertex> cone;
    std::vector<Vertex> touched;
    MinHeap heap;
    cdist_[x] = 0.0;
    touched.push_back(x);
    heap.push({0.0, x});

    double boundary = 0.0;
    double volume = 0.0;
    double internal = 0.0;
    auto add = [&](Vertex v) {
      state_[v] = kCone;
      cone.push_back(v);
      for (const Neighbor& nb : g_.neighbors(v)) {
        const Vertex u = nb.vertex;
        if (label_[u] != part || state_[u] == kBall || state_[u] == kDone) continue;
        const double w = g_.edge(nb.edge).w;
        if (state_[u] == kCone) {
          boundary -= w;
          internal += 1.0;
          continue;
        }
        boundary += w;
        volume += 1.0;
        const double slack =
            (pred_[u] == v && pred_edge_[u] == nb.edge)
                ? 0.0
                : std::max(0.0, g_.edge(nb.edge).resistance() + dist_[v] - dist_[u]);
        const double nd = cdist_[v] + slack;
        if (nd < cdist_[u]) {
          if (cdist_[u] == kInf) touched.push_back(u);
          cdist_[u] = nd;
          heap.push({nd, u});
        }
      }
    };
    auto grow_to = [&](double r) {
      while (!heap.empty() && heap.top().first <= r) {
        auto [d, u] = heap.top();
        heap.pop();
        if (state_[u] != kFree || d > cdist_[u]) continue;
        add(u);
      }
    };

    grow_to(0.0);
    const double mu = internal == 0.0 ? (volume + 1.0) * std::log2(part_m + 1.0)
                                      : volume * std::log2(part_m / internal);
    while (boundary > mu / width) {
      while (!heap.empty() && (state_[heap.top().second] != kFree || heap.top().first > cdist_[heap.top().second]))
        heap.pop();
      if (heap.empty()) break;
      grow_to(heap.top().first);
    }

    for (Vertex v : touched) cdist_[v] = kInf;
    for (Vertex v : cone) state_[v] = kDone;
    return cone;
  }

  const Graph& g_;
  double delta_;
  double beta_ = 0.0;
  std::vector<std::uint32_t> label_;
  std::vector<double> dist_;
  std::vector<Vertex> pred_;
  std::vector<EdgeId> pred_edge_;
  std::vector<std::uint8_t> state_;
  std::vector<double> cdist_;
};

}  // namespace detail

/// Low-stretch spanning tree by recursive star decomposition (Elkin, Emek,
/// Spielman, Teng): a central ball around the center, cones around the ball's
/// shell, one bridge edge per cone, recursion on every piece.
///
/// The seed picks the initial center; the recursion itself is deterministic.
inline SpanningTree elkin_st(const Graph& g, std::uint64_t seed = 0, const ElkinParams& params = {}) {
  if (!is_connected(g)) throw InvalidArgument("elkin_st: graph is disconnected");
  std::mt19937_64 rng(seed);
  const auto center = static_cast<Vertex>(
      std::uniform_int_distribution<std::size_t>(0, g.num_vertices() - 1)(rng));
  detail::StarDecomposer dec(g, params);
  std::vector<EdgeId> tree = dec.run(center);
  return make_spanning_tree(g, tree, center);
}

}  // namespace kosz

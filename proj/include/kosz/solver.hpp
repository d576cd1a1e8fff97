#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kosz/elkin.hpp"
#include "kosz/graph.hpp"
#include "kosz/spanning_tree.hpp"
#include "kosz/tree_flow.hpp"

namespace kosz {

enum class TreeKind { kruskal, dijkstra, elkin, special_grid };
enum class Selection { uniform, weighted };
enum class FlowImpl { naive, log };

/// Rows x columns of a row-major grid graph; {0, 0} when the graph is not a grid.
struct GridShape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  bool valid() const noexcept { return rows > 0 && cols > 0; }
};

struct SolverConfig {
  TreeKind tree = TreeKind::kruskal;
  Selection selection = Selection::weighted;
  FlowImpl flow = FlowImpl::log;
  double tolerance = 1e-4;  // relative residual
  bool stop_on_tolerance = true;
  std::uint64_t max_iterations = 1'000'000'000;
  std::uint64_t residual_check_interval = 0;  // 0: every m repairs
  std::uint64_t rng_seed = 0;
  Vertex dijkstra_root = 0;
  GridShape grid;  // required for TreeKind::special_grid
  ElkinParams elkin;
};

struct SolverCounters {
  std::uint64_t flops = 0;
  std::uint64_t tree_ops = 0;
  double seconds = 0.0;
};

struct SolverResult {
  std::vector<double> x;
  std::uint64_t iterations = 0;
  std::vector<std::pair<std::uint64_t, double>> residual_history;
  SolverCounters counters;
  bool converged = false;

  double final_residual() const { return residual_history.empty() ? 0.0 : residual_history.back().second; }
};

inline SpanningTree build_tree(const Graph& g, const SolverConfig& cfg) {
  switch (cfg.tree) {
    case TreeKind::kruskal: return kruskal_st(g);
    case TreeKind::dijkstra: return dijkstra_st(g, cfg.dijkstra_root);
    case TreeKind::elkin: return elkin_st(g, cfg.rng_seed, cfg.elkin);
    case TreeKind::special_grid:
      if (!cfg.grid.valid()) throw InvalidArgument("special spanning tree needs a grid graph");
      return special_grid_st(g, cfg.grid.rows, cfg.grid.cols);
  }
  throw InvalidArgument("unknown tree kind");
}

// ---------------------------------------------------------------------------
// Cycle bookkeeping

/// Off-tree edge e = (u, v) oriented as stored in the graph, with the
/// resistance of its basis cycle e + P_T(u, v).
struct OffTreeEdge {
  EdgeId id;
  Vertex u;
  Vertex v;
  double resistance;
  double cycle_resistance;
  double sampling_weight;
};

/// Roulette wheel over the off-tree edges.
class CycleSelector {
public:
  CycleSelector(Selection strategy, std::vector<OffTreeEdge> edges, std::uint64_t seed)
      : strategy_(strategy), edges_(std::move(edges)), rng_(seed) {
    prefix_.resize(edges_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      acc += edges_[i].sampling_weight;
      prefix_[i] = acc;
    }
  }

  Selection strategy() const noexcept { return strategy_; }
  bool empty() const noexcept { return edges_.empty(); }
  std::size_t size() const noexcept { return edges_.size(); }
  double total() const noexcept { return prefix_.empty() ? 0.0 : prefix_.back(); }
  std::span<const OffTreeEdge> edges() const noexcept { return edges_; }
  std::span<const double> prefix_sums() const noexcept { return prefix_; }

  /// Uniform: O(1) index draw. Weighted: binary search over prefix sums.
  const OffTreeEdge& sample() {
    if (edges_.empty()) throw InvalidArgument("sample_cycle: no off-tree edges");
    if (strategy_ == Selection::uniform)
      return edges_[std::uniform_int_distribution<std::size_t>(0, edges_.size() - 1)(rng_)];
    const double x = std::uniform_real_distribution<double>(0.0, total())(rng_);
    auto it = std::upper_bound(prefix_.begin(), prefix_.end(), x);
    if (it == prefix_.end()) --it;
    return edges_[static_cast<std::size_t>(it - prefix_.begin())];
  }

private:
  Selection strategy_;
  std::vector<OffTreeEdge> edges_;
  std::vector<double> prefix_;
  std::mt19937_64 rng_;
};

inline const OffTreeEdge& sample_cycle(CycleSelector& sel) { return sel.sample(); }

/// Probes every basis cycle's tree-path resistance through the flow
/// structure. Weighted selection uses cycle_resistance / r_e, uniform uses 1.
template <TreeFlow F>
CycleSelector init_cycle_weights(const Graph& g, const SpanningTree& t, F& flow, Selection strategy,
                                 std::uint64_t seed = 0) {
  std::vector<OffTreeEdge> edges;
  edges.reserve(g.num_edges() + 1 - std::min(g.num_edges() + 1, g.num_vertices()));
  for (EdgeId id = 0; id < g.num_edges(); ++id) {
    if (t.is_tree_edge(id)) continue;
    const Edge& e = g.edge(id);
    const double r = e.resistance();
    const double cycle = r + tree_path_resistance(flow, e.u, e.v);
    const double weight = strategy == Selection::weighted ? cycle / r : 1.0;
    edges.push_back({id, e.u, e.v, r, cycle, weight});
  }
  return CycleSelector(strategy, std::move(edges), seed);
}

inline void check_demand(std::span<const double> b) {
  double sum = 0.0, l1 = 0.0;
  for (double x : b) {
    sum += x;
    l1 += std::abs(x);
  }
  if (std::abs(sum) > 1e-9 * l1) throw InvalidArgument("demand vector must sum to zero");
}

/// Routes the demand b over the tree only: every vertex, deepest first,
/// sends its accumulated demand to its parent.
template <TreeFlow F>
void initial_tree_flow(const SpanningTree& t, std::span<const double> b, F& flow) {
  if (b.size() != t.num_vertices()) throw InvalidArgument("initial_tree_flow: dimension mismatch");
  check_demand(b);
  std::vector<double> f(b.begin(), b.end());
  for (std::size_t i = t.order.size(); i-- > 1;) {
    const Vertex v = t.order[i];
    f[t.parent[v]] += f[v];
  }
  f[t.root] = 0.0;
  flow.assign(f);
}

/// Cancels the potential drop around e's basis cycle (e from u to v, then
/// the tree path back from v to u). Returns the amount of flow moved.
template <TreeFlow F>
double repair_cycle(F& flow, std::span<double> off_tree_flow, const OffTreeEdge& e, OpCounters* counters = nullptr) {
  const double drop = off_tree_flow[e.id] * e.resistance - flow.query_pair(e.u, e.v);
  const double alpha = drop / e.cycle_resistance;
  off_tree_flow[e.id] -= alpha;
  flow.update_pair(e.u, e.v, alpha);
  if (counters) counters->flops += 4;
  return alpha;
}

/// Potential drop around e's basis cycle in the current flow.
template <TreeFlow F>
double cycle_drop(const F& flow, std::span<const double> off_tree_flow, const OffTreeEdge& e) {
  return off_tree_flow[e.id] * e.resistance - flow.query_pair(e.u, e.v);
}

/// Potentials induced by the tree flow, root at 0 before mean removal.
inline std::vector<double> extract_potentials(const SpanningTree& t, std::span<const double> tree_flows,
                                              OpCounters* counters = nullptr) {
  std::vector<double> x(t.num_vertices(), 0.0);
  for (std::size_t i = 1; i < t.order.size(); ++i) {
    const Vertex v = t.order[i];
    x[v] = x[t.parent[v]] + tree_flows[v] * t.parent_resistance[v];
  }
  remove_mean(x);
  if (counters) counters->flops += 4 * x.size();
  return x;
}

template <TreeFlow F>
std::vector<double> extract_potentials(const SpanningTree& t, const F& flow, OpCounters* counters = nullptr) {
  const std::vector<double> f = flow.tree_flows();
  return extract_potentials(t, f, counters);
}

/// Flow on every graph edge, oriented edge.u -> edge.v.
template <TreeFlow F>
std::vector<double> edge_flows(const Graph& g, const SpanningTree& t, const F& flow,
                               std::span<const double> off_tree_flow) {
  std::vector<double> out(off_tree_flow.begin(), off_tree_flow.end());
  const std::vector<double> f = flow.tree_flows();
  for (Vertex v : t.order) {
    if (v == t.root) continue;
    const EdgeId id = t.parent_edge[v];
    out[id] = g.edge(id).u == v ? f[v] : -f[v];
  }
  return out;
}

/// sum_e f_e^2 r_e.
inline double flow_energy(const Graph& g, std::span<const double> flows) {
  double s = 0.0;
  for (EdgeId id = 0; id < g.num_edges(); ++id) s += flows[id] * flows[id] * g.edge(id).resistance();
  return s;
}

// ---------------------------------------------------------------------------
// Solver

template <TreeFlow F>
SolverResult kosz_solve_on_tree(const Graph& g, std::span<const double> b, const SpanningTree& t,
                                const SolverConfig& cfg) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();

  F flow(t);
  OpCounters own;
  initial_tree_flow(t, b, flow);
  CycleSelector selector = init_cycle_weights(g, t, flow, cfg.selection, cfg.rng_seed);
  std::vector<double> off_tree(g.num_edges(), 0.0);

  const std::uint64_t interval = cfg.residual_check_interval ? cfg.residual_check_interval
                                                             : std::max<std::uint64_t>(1, g.num_edges());
  SolverResult res;
  auto check = [&](std::uint64_t it) {
    res.x = extract_potentials(t, flow, &own);
    const double rr = relative_residual(g, b, res.x, &own);
    res.residual_history.emplace_back(it, rr);
    return rr;
  };

  double rr = check(0);
  std::uint64_t it = 0;
  bool fresh = true;
  if (!(cfg.stop_on_tolerance && rr <= cfg.tolerance)) {
    while (!selector.empty() && it < cfg.max_iterations) {
      repair_cycle(flow, off_tree, selector.sample(), &own);
      ++it;
      fresh = false;
      if (it % interval == 0) {
        rr = check(it);
        fresh = true;
        if (!std::isfinite(rr)) throw SolverError("residual is not finite");
        if (cfg.stop_on_tolerance && rr <= cfg.tolerance) break;
      }
    }
  }
  if (!fresh) rr = check(it);

  res.iterations = it;
  res.converged = rr <= cfg.tolerance;
  own += flow.counters();
  res.counters.flops = own.flops;
  res.counters.tree_ops = own.tree_ops;
  res.counters.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return res;
}

inline void validate_solve_input(const Graph& g, std::span<const double> b, const SolverConfig& cfg) {
  if (g.num_vertices() == 0) throw InvalidArgument("empty graph");
  if (b.size() != g.num_vertices()) throw InvalidArgument("demand vector has wrong size");
  if (!(cfg.tolerance > 0.0)) throw InvalidArgument("tolerance must be positive");
  if (!is_connected(g)) throw InvalidArgument("graph is disconnected");
  check_demand(b);
  if (norm2(b) == 0.0) throw InvalidArgument("demand vector must be nonzero");
}

inline SolverResult kosz_solve(const Graph& g, std::span<const double> b, const SpanningTree& t,
                               const SolverConfig& cfg) {
  validate_solve_input(g, b, cfg);
  if (cfg.flow == FlowImpl::naive) return kosz_solve_on_tree<NaiveTreeFlow>(g, b, t, cfg);
  return kosz_solve_on_tree<LogTreeFlow>(g, b, t, cfg);
}

/// KOSZ simple solver: tree flow, then random basis-cycle repairs until the
/// relative residual drops to cfg.tolerance.
inline SolverResult kosz_solve(const Graph& g, std::span<const double> b, const SolverConfig& cfg) {
  validate_solve_input(g, b, cfg);
  const SpanningTree t = build_tree(g, cfg);
  return kosz_solve(g, b, t, cfg);
}

}  // namespace kosz

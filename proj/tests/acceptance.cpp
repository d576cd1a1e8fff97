// Acceptance run: one PASS/FAIL line per criterion. Pass criterion ids as
// arguments to run a subset; with no arguments every criterion runs.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "kosz/bench.hpp"
#include "support.hpp"

using namespace kosz;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double ls_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Outcome oracle_correctness() {
  std::mt19937_64 rng(2024);
  double worst_res = 0.0, worst_err = 0.0;
  int bad = 0;
  const TreeKind kinds[] = {TreeKind::kruskal, TreeKind::dijkstra, TreeKind::elkin};
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 2 + rng() % 63;
    const std::size_t cap = std::min<std::size_t>(200, n * (n - 1) / 2);
    const std::size_t m = n - 1 + rng() % (cap - (n - 1) + 1);
    const Graph g = test::random_connected_graph(n, m, i % 2 == 0, rng());
    const auto b = test::random_mean_zero(n, rng());
    SolverConfig c;
    c.tree = kinds[i % 3];
    c.selection = i % 4 < 2 ? Selection::weighted : Selection::uniform;
    c.flow = i % 5 ? FlowImpl::log : FlowImpl::naive;
    c.tolerance = 1e-8;
    c.rng_seed = static_cast<std::uint64_t>(i);
    const SolverResult r = kosz_solve(g, b, c);
    const double res = relative_residual(g, b, r.x);
    const double err = test::rel_diff(r.x, test::pinv_solve(g, b));
    worst_res = std::max(worst_res, res);
    worst_err = std::max(worst_err, err);
    if (!r.converged || res > 1e-8 || err > 1e-5) ++bad;
  }
  return {bad == 0, fmt("100 graphs, %d failing, worst residual %.3g, worst oracle error %.3g", bad, worst_res, worst_err)};
}

Outcome flow_equivalence() {
  std::mt19937_64 rng(77);
  double worst = 0.0;
  int bad = 0;
  for (int seq = 0; seq < 1000; ++seq) {
    SpanningTree t;
    if (seq % 10 == 0) {
      // long paths stress the naive walk, so keep them shorter
      const std::size_t n = 2 + rng() % 511;
      std::vector<Edge> edges;
      for (Vertex v = 1; v < n; ++v) edges.push_back({v - 1, v, 1.0 + static_cast<double>(rng() % 7)});
      const Graph g(n, edges);
      std::vector<EdgeId> ids(n - 1);
      for (EdgeId e = 0; e < ids.size(); ++e) ids[e] = e;
      t = make_spanning_tree(g, ids, static_cast<Vertex>(rng() % n));
    } else {
      const std::size_t n = 2 + rng() % 4095;
      const Graph g = test::random_tree(n, rng(), seq % 2 == 0);
      std::vector<EdgeId> ids(n - 1);
      for (EdgeId e = 0; e < ids.size(); ++e) ids[e] = e;
      t = make_spanning_tree(g, ids, static_cast<Vertex>(rng() % n));
    }
    const std::size_t n = t.num_vertices();
    NaiveTreeFlow naive(t);
    LogTreeFlow fast(t);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    const std::size_t ops = 1 + rng() % 10000;
    for (std::size_t i = 0; i < ops; ++i) {
      const auto u = static_cast<Vertex>(rng() % n), v = static_cast<Vertex>(rng() % n);
      const double x = d(rng);
      double a = 0.0, b = 0.0;
      switch (rng() % 4) {
        case 0: naive.update(u, x), fast.update(u, x); continue;
        case 1: naive.update_pair(u, v, x), fast.update_pair(u, v, x); continue;
        case 2: a = naive.query(u), b = fast.query(u); break;
        default: a = naive.query_pair(u, v), b = fast.query_pair(u, v);
      }
      const double diff = std::abs(a - b) / std::max(1.0, std::abs(a));
      worst = std::max(worst, diff);
      if (diff > 1e-9) ++bad;
    }
    const auto fa = naive.tree_flows(), fb = fast.tree_flows();
    for (std::size_t u = 0; u < n; ++u) {
      const double diff = std::abs(fa[u] - fb[u]) / std::max(1.0, std::abs(fa[u]));
      worst = std::max(worst, diff);
      if (diff > 1e-9) ++bad;
    }
  }
  return {bad == 0, fmt("1000 sequences, %d mismatches, worst relative difference %.3g", bad, worst)};
}

Outcome cycle_repair_invariant() {
  int bad = 0;
  std::uint64_t repairs = 0;
  double worst_drop = 0.0, worst_rise = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const std::size_t n = 8 + s * 2;
    const Graph g = test::random_connected_graph(n, 3 * n, s % 2 == 0, s + 100);
    const auto b = test::random_mean_zero(n, s + 200);
    const SpanningTree t = s % 3 == 0 ? kruskal_st(g) : s % 3 == 1 ? dijkstra_st(g) : elkin_st(g, s);
    LogTreeFlow f(t);
    initial_tree_flow(t, b, f);
    CycleSelector sel = init_cycle_weights(g, t, f, s % 2 ? Selection::uniform : Selection::weighted, s);
    std::vector<double> off(g.num_edges(), 0.0);
    auto flows = edge_flows(g, t, f, off);
    double energy = flow_energy(g, flows);
    // the full solve loop, checked after every single repair
    for (std::uint64_t it = 1; it <= 2'000'000; ++it) {
      const OffTreeEdge& e = sel.sample();
      repair_cycle(f, off, e);
      ++repairs;
      flows = edge_flows(g, t, f, off);
      double fmax = 0.0;
      for (double v : flows) fmax = std::max(fmax, std::abs(v));
      const double drop = std::abs(cycle_drop(f, off, e)) / (e.cycle_resistance * fmax);
      worst_drop = std::max(worst_drop, drop);
      if (drop > 1e-12) ++bad;
      const double en = flow_energy(g, flows);
      worst_rise = std::max(worst_rise, (en - energy) / energy);
      if (en > energy * (1.0 + 1e-12)) ++bad;
      energy = en;
      if (it % g.num_edges() == 0 && relative_residual(g, b, extract_potentials(t, f)) <= 1e-8) break;
    }
    if (relative_residual(g, b, extract_potentials(t, f)) > 1e-8) ++bad;
  }
  return {bad == 0, fmt("20 solves, %llu repairs, %d violations, worst scaled drop %.3g, worst energy rise %.3g", static_cast<unsigned long long>(repairs), bad,
                        worst_drop, worst_rise)};
}

Outcome grid_stretch_growth() {
  std::vector<double> ratios;
  std::string detail;
  for (std::size_t s : {8, 16, 32, 64, 128}) {
    const Graph g = grid_graph(s, s);
    const StretchReport st = stretch(g, special_grid_st(g, s, s));
    ratios.push_back(st.average / std::log(static_cast<double>(s)));
    detail += fmt("s=%zu avg %.3f; ", s, st.average);
  }
  const double q = *std::max_element(ratios.begin(), ratios.end()) / *std::min_element(ratios.begin(), ratios.end());
  return {q <= 2.0, detail + fmt("max/min of avg/ln s = %.3f", q)};
}

Outcome stretch_ordering() {
  const Graph grid = grid_graph(100, 100);
  const double special = stretch(grid, special_grid_st(grid, 100, 100)).average;
  const double kg = stretch(grid, kruskal_st(grid)).average;
  const double dg = stretch(grid, dijkstra_st(grid)).average;
  GraphSpec ba = parse_graph_spec("ba:10000:4");
  ba.weighted = true;
  const Graph g = make_graph(ba);
  const double kb = stretch(g, kruskal_st(g)).average;
  const double eb = stretch(g, elkin_st(g)).average;
  const bool grid_ok = special < std::min(kg, dg), ba_ok = eb > kb;
  return {grid_ok && ba_ok, fmt("grid: special %.2f, kruskal %.2f, dijkstra %.2f (%s); weighted BA: elkin %.2f vs kruskal %.2f (%s)",
                                special, kg, dg, grid_ok ? "ok" : "wrong order", eb, kb,
                                ba_ok ? "ok" : "elkin not above kruskal")};
}

Outcome convergence_shape() {
  const Graph g = grid_graph(100, 100);
  const auto b = random_demand(g.num_vertices(), 1);
  SolverConfig c;
  c.tree = TreeKind::special_grid;
  c.selection = Selection::weighted;
  c.grid = {100, 100};
  const SolverResult r = kosz_solve(g, b, c);
  std::vector<double> its, logs;
  for (const auto& [it, rr] : r.residual_history) {
    its.push_back(static_cast<double>(it));
    logs.push_back(std::log(rr));
  }
  const double slope = its.size() >= 2 ? ls_slope(its, logs) : 0.0;
  const SolverResult cg = cg_solve(g, b);
  const bool ok = r.converged && r.final_residual() <= 1e-4 && slope < 0.0 &&
                  r.iterations >= 10 * cg.iterations;
  return {ok, fmt("kosz %llu repairs to %.3g, log-residual slope %.3g per repair, cg %llu SpMVs, ratio %.0f",
                  static_cast<unsigned long long>(r.iterations), r.final_residual(), slope,
                  static_cast<unsigned long long>(cg.iterations),
                  static_cast<double>(r.iterations) / static_cast<double>(cg.iterations))};
}

Outcome cg_spmv_count() {
  GraphSpec ba = parse_graph_spec("ba:25000:4");
  ba.weighted = true;
  const Graph g = make_graph(ba);
  const SolverResult r = cg_solve(g, random_demand(g.num_vertices(), 1));
  const double spmvs = static_cast<double>(r.iterations);
  const bool ok = r.converged && spmvs >= 204 * 0.75 && spmvs <= 204 * 1.25;
  return {ok, fmt("cg used %.0f SpMVs to %.3g (target 153..255)", spmvs, r.final_residual())};
}

Outcome scaling_exponents() {
  ExperimentConfig c;
  c.experiment = Experiment::scaling;
  c.graph = parse_graph_spec("grid");
  c.solver.tree = TreeKind::special_grid;
  c.sizes = {50, 71, 100, 141, 200};
  c.trials = 3;
  const Report r = run_scaling(c);
  const double kb = r.extra["fits"]["kosz"]["b"].get<double>(), cb = r.extra["fits"]["cg"]["b"].get<double>();
  // plain log-log slopes as a cross-check on the three-parameter fit
  std::vector<double> lx, lk, lc;
  const std::size_t n_col = r.rows.column("n"), f_col = r.rows.column("flops_mean");
  for (const auto& row : r.rows.rows) {
    const double x = std::log(as_double(row[n_col])), y = std::log(as_double(row[f_col]));
    if (std::get<std::string>(row[0]) == "kosz") {
      lx.push_back(x);
      lk.push_back(y);
    } else {
      lc.push_back(y);
    }
  }
  const double ks = ls_slope(lx, lk), cs = ls_slope(lx, lc);
  const bool ok = cb >= 1.35 && cb <= 1.65 && kb <= 1.3;
  return {ok, fmt("flop exponents: cg b %.3f (log-log %.3f), kosz b %.3f (log-log %.3f)", cb, cs, kb, ks)};
}

Outcome smoothing_spectra() {
  ExperimentConfig c;
  c.experiment = Experiment::smoothing;
  c.graph = parse_graph_spec("grid:32x32");
  c.solver.tree = TreeKind::special_grid;
  c.iteration_counts = {0, 10000};
  const Report r = run_smoothing(c);
  const auto& sum = r.extra["summary"];
  const double h0 = sum[0]["hf_ratio"].get<double>(), h1 = sum[1]["hf_ratio"].get<double>();
  double worst = 0.0;
  for (std::size_t run = 0; run < 2; ++run) {
    double spatial = 0.0, spectral = 0.0;
    for (std::size_t i = run * 1024; i < (run + 1) * 1024; ++i) {
      const double e = as_double(r.rows.rows[i][3]), m = as_double(r.rows.rows[i][4]);
      spatial += e * e;
      spectral += m * m;
    }
    worst = std::max(worst, std::abs(spectral / 1024.0 - spatial) / spatial);
  }
  const bool ok = h1 < h0 && worst <= 1e-9;
  return {ok, fmt("hf ratio %.3f at 0 iterations, %.3f at 10^4; worst Parseval error %.3g", h0, h1, worst)};
}

Outcome determinism() {
  std::vector<ExperimentConfig> configs;
  ExperimentConfig s;
  s.experiment = Experiment::stretch;
  s.graph = parse_graph_spec("grid:40x40");
  configs.push_back(s);
  s.graph = parse_graph_spec("ba:2000:4");
  s.graph.weighted = true;
  configs.push_back(s);
  ExperimentConfig cv;
  cv.experiment = Experiment::convergence;
  cv.graph = parse_graph_spec("grid:24x24");
  configs.push_back(cv);
  ExperimentConfig sc;
  sc.experiment = Experiment::scaling;
  sc.graph = parse_graph_spec("grid");
  sc.solver.tree = TreeKind::special_grid;
  sc.sizes = {12, 17, 24};
  sc.trials = 2;
  configs.push_back(sc);
  ExperimentConfig sm;
  sm.experiment = Experiment::smoothing;
  sm.graph = parse_graph_spec("grid:32x32");
  sm.solver.tree = TreeKind::special_grid;
  sm.iteration_counts = {0, 1, 1000};
  configs.push_back(sm);

  int same = 0;
  for (const auto& c : configs) same += payload(run_experiment(c)) == payload(run_experiment(c));
  ExperimentConfig sv;
  sv.graph = parse_graph_spec("grid:30x30");
  sv.solver.tree = TreeKind::special_grid;
  same += payload(run_solve(sv)) == payload(run_solve(sv));
  sv.method = "cg";
  same += payload(run_solve(sv)) == payload(run_solve(sv));
  const int total = static_cast<int>(configs.size()) + 2;
  return {same == total, fmt("%d of %d reruns byte-identical", same, total)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::function<Outcome()>> criteria{
      {1, oracle_correctness}, {2, flow_equivalence},  {3, cycle_repair_invariant}, {4, grid_stretch_growth},
      {5, stretch_ordering},   {6, convergence_shape}, {7, cg_spmv_count},          {8, scaling_exponents},
      {9, smoothing_spectra},  {10, determinism}};
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
  if (ids.empty())
    for (const auto& [id, _] : criteria) ids.push_back(id);

  int failed = 0;
  for (int id : ids) {
    const auto it = criteria.find(id);
    if (it == criteria.end()) {
      std::printf("criterion %d: FAIL unknown criterion\n", id);
      ++failed;
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = it->second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %d: %s %s [%.1fs]\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed ? 1 : 0;
}

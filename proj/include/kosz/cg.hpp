#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "kosz/graph.hpp"
#include "kosz/solver.hpp"

namespace kosz {

struct CGConfig {
  double tolerance = 1e-4;
  std::uint64_t max_iterations = 0;  // 0: 10 n
  std::uint64_t true_residual_interval = 50;
};

namespace detail {
inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
}  // namespace detail

/// Unpreconditioned conjugate gradient on L x = b from x0 = 0. One SpMV per
/// iteration; the recursive residual is replaced by b - Lx every
/// true_residual_interval iterations.
inline SolverResult cg_solve(const Graph& g, std::span<const double> b, const CGConfig& cfg = {}) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const std::size_t n = g.num_vertices();
  if (n == 0) throw InvalidArgument("empty graph");
  if (b.size() != n) throw InvalidArgument("demand vector has wrong size");
  if (!(cfg.tolerance > 0.0)) throw InvalidArgument("tolerance must be positive");
  if (!is_connected(g)) throw InvalidArgument("graph is disconnected");
  check_demand(b);
  const double bnorm = norm2(b);
  if (bnorm == 0.0) throw InvalidArgument("demand vector must be nonzero");
  const std::uint64_t max_it = cfg.max_iterations ? cfg.max_iterations : 10 * n;

  OpCounters ops;
  SolverResult res;
  std::vector<double> x(n, 0.0), r(b.begin(), b.end()), p(r), q(n);
  double rr = detail::dot(r, r);
  ops.flops += 2 * n;
  res.residual_history.emplace_back(0, std::sqrt(rr) / bnorm);

  std::uint64_t it = 0;
  double rel = std::sqrt(rr) / bnorm;
  while (rel > cfg.tolerance && it < max_it) {
    laplacian_apply(g, p, q, &ops);
    const double pq = detail::dot(p, q);
    if (!(pq > 0.0)) throw SolverError("cg: search direction lost positivity");
    const double alpha = rr / pq;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    ++it;
    if (cfg.true_residual_interval && it % cfg.true_residual_interval == 0) {
      laplacian_apply(g, x, q, &ops);
      for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
      ops.flops += n;
    }
    const double rr_new = detail::dot(r, r);
    const double beta = rr_new / rr;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    rr = rr_new;
    ops.flops += 2 * n + 4 * n + 2 * n + 2 * n + 2;
    rel = std::sqrt(rr) / bnorm;
    res.residual_history.emplace_back(it, rel);
    if (!std::isfinite(rel) || rel > 1e6 * res.residual_history.front().second)
      throw SolverError("cg: residual diverged");
  }

  remove_mean(x);
  res.x = std::move(x);
  res.iterations = it;
  res.converged = rel <= cfg.tolerance;
  res.counters.flops = ops.flops;
  res.counters.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return res;
}

}  // namespace kosz

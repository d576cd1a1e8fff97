#pragma once

#include <cstdint>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "kosz/graph.hpp"

namespace kosz::test {

// Random connected graph: a random spanning tree plus extra distinct edges.
inline Graph random_connected_graph(std::size_t n, std::size_t m, bool weighted, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> wd(1.0, 8.0);
  std::set<std::pair<Vertex, Vertex>> have;
  std::vector<Edge> edges;
  auto put = [&](Vertex a, Vertex b) {
    if (a > b) std::swap(a, b);
    if (a == b || !have.insert({a, b}).second) return false;
    edges.push_back({a, b, weighted ? wd(rng) : 1.0});
    return true;
  };
  for (Vertex v = 1; v < n; ++v) put(static_cast<Vertex>(rng() % v), v);
  const std::size_t cap = n * (n - 1) / 2;
  while (edges.size() < std::min(m, cap)) put(static_cast<Vertex>(rng() % n), static_cast<Vertex>(rng() % n));
  return Graph(n, std::move(edges));
}

// Random tree on n vertices (Prufer-free: attach each vertex to an earlier one).
inline Graph random_tree(std::size_t n, std::uint64_t seed, bool weighted = true) {
  return random_connected_graph(n, n - 1, weighted, seed);
}

inline Eigen::MatrixXd dense_laplacian(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.num_vertices());
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (const Edge& e : g.edges()) {
    L(e.u, e.u) += e.w;
    L(e.v, e.v) += e.w;
    L(e.u, e.v) -= e.w;
    L(e.v, e.u) -= e.w;
  }
  return L;
}

// Mean-zero solution of L x = b through the pseudoinverse
// (eigendecomposition, null space dropped).
inline std::vector<double> pinv_solve(const Graph& g, const std::vector<double>& b) {
  const Eigen::MatrixXd L = dense_laplacian(g);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double cut = 1e-10 * ev.cwiseAbs().maxCoeff();
  Eigen::VectorXd bb = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
  Eigen::VectorXd c = es.eigenvectors().transpose() * bb;
  for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = std::abs(ev[i]) > cut ? c[i] / ev[i] : 0.0;
  const Eigen::VectorXd x = es.eigenvectors() * c;
  return {x.data(), x.data() + x.size()};
}

inline std::vector<double> random_mean_zero(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> b(n);
  double s = 0.0;
  for (double& x : b) s += (x = d(rng));
  for (double& x : b) x -= s / static_cast<double>(n);
  return b;
}

inline double rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / den);
}

}  // namespace kosz::test

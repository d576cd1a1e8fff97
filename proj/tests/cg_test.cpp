#include <gtest/gtest.h>

#include "kosz/cg.hpp"
#include "support.hpp"

using namespace kosz;

TEST(Cg, PathExample) {
  const Graph p(3, {{0, 1, 1.0}, {1, 2, 1.0}});
  const SolverResult r = cg_solve(p, std::vector<double>{1, 0, -1});
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.iterations, 2u);
  EXPECT_NEAR(r.x[0], 1.0, 1e-12);
  EXPECT_NEAR(r.x[1], 0.0, 1e-12);
  EXPECT_NEAR(r.x[2], -1.0, 1e-12);
}

TEST(Cg, FiniteTermination) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const std::size_t n = 5 + s;
    const Graph g = test::random_connected_graph(n, 3 * n, s % 2 == 0, s);
    const auto b = test::random_mean_zero(n, s + 1);
    CGConfig c;
    c.tolerance = 1e-10;
    c.max_iterations = n;
    const SolverResult r = cg_solve(g, b, c);
    EXPECT_TRUE(r.converged) << s;
    EXPECT_LE(relative_residual(g, b, r.x), 1e-9);
    EXPECT_LE(test::rel_diff(r.x, test::pinv_solve(g, b)), 1e-7);
  }
}

TEST(Cg, CountsOneSpmvPerIteration) {
  const Graph g = grid_graph(20, 20);
  const auto b = test::random_mean_zero(400, 3);
  CGConfig c;
  c.true_residual_interval = 0;
  const SolverResult r = cg_solve(g, b, c);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.residual_history.size(), r.iterations + 1);
  EXPECT_LE(r.final_residual(), 1e-4);
  EXPECT_GE(r.counters.flops, r.iterations * spmv_flops(g));
  EXPECT_LE(r.counters.flops, r.iterations * (spmv_flops(g) + 12 * 400) + 2 * 400);
}

TEST(Cg, IterationsGrowLikeSqrtN) {
  std::vector<double> logn, logit;
  for (std::size_t s : {32, 64, 128, 256}) {
    const Graph g = grid_graph(s, s);
    const SolverResult r = cg_solve(g, test::random_mean_zero(s * s, s));
    logn.push_back(std::log(static_cast<double>(s * s)));
    logit.push_back(std::log(static_cast<double>(r.iterations)));
  }
  const double slope = (logit.back() - logit.front()) / (logn.back() - logn.front());
  EXPECT_GE(slope, 0.4);
  EXPECT_LE(slope, 0.6);
}

TEST(Cg, RejectsBadInput) {
  const Graph p(3, {{0, 1, 1.0}, {1, 2, 1.0}});
  EXPECT_THROW(cg_solve(p, std::vector<double>{1, 0, 0}), InvalidArgument);
  EXPECT_THROW(cg_solve(p, std::vector<double>{0, 0, 0}), InvalidArgument);
  EXPECT_THROW(cg_solve(p, std::vector<double>{0, 0}), InvalidArgument);
}

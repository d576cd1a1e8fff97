#include <gtest/gtest.h>

#include "kosz/bench.hpp"

using namespace kosz;

// Order of magnitude only: the reference count is about six million repairs.
TEST(LongKosz, WeightedBa25000NeedsMillionsOfRepairs) {
  GraphSpec spec = parse_graph_spec("ba:25000:4");
  spec.weighted = true;
  const Graph g = make_graph(spec);
  SolverConfig c;
  c.tree = TreeKind::dijkstra;
  c.selection = Selection::uniform;
  const SolverResult r = kosz_solve(g, random_demand(g.num_vertices(), 1), c);
  ASSERT_TRUE(r.converged);
  std::printf("repairs: %llu\n", static_cast<unsigned long long>(r.iterations));
  EXPECT_GE(r.iterations, 1'000'000u);
  EXPECT_LE(r.iterations, 10'000'000u);
}

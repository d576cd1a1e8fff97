#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <type_traits>
#include <unordered_set>
#include <vector>

#include "kosz/graph.hpp"

namespace kosz {

// Plain-text edge list:
//   n m
//   u v w      (m lines, 0-based vertices, decimal weights)

namespace detail {

inline std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  for (std::string tok; is >> tok;) out.push_back(tok);
  return out;
}

template <class T>
bool parse_number(const std::string& s, T& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if constexpr (std::is_floating_point_v<T>) {
    char* end = nullptr;
    out = std::strtod(first, &end);
    return end == last && first != last;
  } else {
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
  }
}

}  // namespace detail

inline Graph read_graph(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };

  if (!next_line()) throw ParseError(lineno + 1, "missing header \"n m\"");
  auto head = detail::split_ws(line);
  std::size_t n = 0, m = 0;
  if (head.size() != 2 || !detail::parse_number(head[0], n) || !detail::parse_number(head[1], m))
    throw ParseError(lineno, "header must be \"n m\"");

  std::vector<Edge> edges;
  edges.reserve(m);
  std::unordered_set<std::uint64_t> seen;
  for (std::size_t i = 0; i < m; ++i) {
    if (!next_line()) throw ParseError(lineno + 1, "expected " + std::to_string(m) + " edges, got " + std::to_string(i));
    auto tok = detail::split_ws(line);
    Vertex u = 0, v = 0;
    double w = 0.0;
    if (tok.size() != 3 || !detail::parse_number(tok[0], u) || !detail::parse_number(tok[1], v) ||
        !detail::parse_number(tok[2], w))
      throw ParseError(lineno, "expected \"u v w\"");
    if (u >= n || v >= n) throw ParseError(lineno, "vertex index out of range");
    if (u == v) throw ParseError(lineno, "self-loop");
    if (!(w > 0.0) || !std::isfinite(w)) throw ParseError(lineno, "weight must be positive");
    const std::uint64_t key = (static_cast<std::uint64_t>(std::min(u, v)) << 32) | std::max(u, v);
    if (!seen.insert(key).second) throw ParseError(lineno, "duplicate edge");
    edges.push_back({u, v, w});
  }
  if (next_line()) throw ParseError(lineno, "trailing data after " + std::to_string(m) + " edges");
  return Graph(n, std::move(edges));
}

inline Graph read_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return read_graph(in);
}

inline void write_graph(const Graph& g, std::ostream& out) {
  out << g.num_vertices() << ' ' << g.num_edges() << '\n';
  char buf[64];
  for (const Edge& e : g.edges()) {
    std::snprintf(buf, sizeof buf, "%.17g", e.w);
    out << e.u << ' ' << e.v << ' ' << buf << '\n';
  }
}

inline void write_graph(const Graph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_graph(g, out);
}

}  // namespace kosz

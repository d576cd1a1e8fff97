#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>

#include "json.hpp"
#include "kosz/cg.hpp"
#include "kosz/graph.hpp"
#include "kosz/graph_io.hpp"
#include "kosz/smoothing.hpp"
#include "kosz/solver.hpp"
#include "kosz/spanning_tree.hpp"

namespace kosz {

using Json = nlohmann::ordered_json;

/// Bad command line or configuration; the CLI maps it to exit code 1.
class UsageError : public InvalidArgument {
public:
  using InvalidArgument::InvalidArgument;
};

// ---------------------------------------------------------------------------
// Names

inline std::string to_string(TreeKind t) {
  switch (t) {
    case TreeKind::kruskal: return "kruskal";
    case TreeKind::dijkstra: return "dijkstra";
    case TreeKind::elkin: return "elkin";
    case TreeKind::special_grid: return "special";
  }
  return "?";
}
inline std::string to_string(Selection s) { return s == Selection::uniform ? "uniform" : "weighted"; }
inline std::string to_string(FlowImpl f) { return f == FlowImpl::naive ? "naive" : "log"; }

inline TreeKind parse_tree_kind(const std::string& s) {
  if (s == "kruskal") return TreeKind::kruskal;
  if (s == "dijkstra") return TreeKind::dijkstra;
  if (s == "elkin") return TreeKind::elkin;
  if (s == "special") return TreeKind::special_grid;
  throw UsageError("unknown tree '" + s + "'");
}
inline Selection parse_selection(const std::string& s) {
  if (s == "uniform") return Selection::uniform;
  if (s == "weighted") return Selection::weighted;
  throw UsageError("unknown selection '" + s + "'");
}
inline FlowImpl parse_flow(const std::string& s) {
  if (s == "naive") return FlowImpl::naive;
  if (s == "log") return FlowImpl::log;
  throw UsageError("unknown flow structure '" + s + "'");
}

// ---------------------------------------------------------------------------
// Graph specs

struct GraphSpec {
  enum class Family { grid, ba, file };
  Family family = Family::grid;
  std::size_t rows = 0, cols = 0;  // grid; 0 x 0 means "sizes come from elsewhere"
  std::size_t n = 0, k = 0;        // ba
  std::string path;                // file
  bool weighted = false;
  std::uint64_t graph_seed = 1;
  std::uint64_t weight_seed = 1;

  bool is_grid() const noexcept { return family == Family::grid; }
  friend bool operator==(const GraphSpec&, const GraphSpec&) = default;
};

namespace detail {
inline std::size_t parse_size(const std::string& s, const std::string& what) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) throw UsageError("bad " + what + " '" + s + "'");
  return v;
}
}  // namespace detail

/// grid:KxL | grid | ba:N:K | file:PATH
inline GraphSpec parse_graph_spec(const std::string& text) {
  GraphSpec spec;
  const auto colon = text.find(':');
  const std::string family = text.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (family == "grid") {
    spec.family = GraphSpec::Family::grid;
    if (colon == std::string::npos) return spec;
    const auto x = rest.find('x');
    if (x == std::string::npos) throw UsageError("grid spec must be grid:KxL");
    spec.rows = detail::parse_size(rest.substr(0, x), "grid rows");
    spec.cols = detail::parse_size(rest.substr(x + 1), "grid columns");
    if (spec.rows == 0 || spec.cols == 0) throw UsageError("grid dimensions must be positive");
  } else if (family == "ba") {
    spec.family = GraphSpec::Family::ba;
    const auto c = rest.find(':');
    if (colon == std::string::npos || c == std::string::npos) throw UsageError("ba spec must be ba:N:K");
    spec.n = detail::parse_size(rest.substr(0, c), "ba size");
    spec.k = detail::parse_size(rest.substr(c + 1), "ba attachment");
    if (spec.k == 0 || spec.n <= spec.k) throw UsageError("ba spec needs 0 < K < N");
  } else if (family == "file") {
    spec.family = GraphSpec::Family::file;
    if (rest.empty()) throw UsageError("file spec must be file:PATH");
    spec.path = rest;
  } else {
    throw UsageError("unknown graph family '" + family + "'");
  }
  return spec;
}

inline std::string to_string(const GraphSpec& s) {
  switch (s.family) {
    case GraphSpec::Family::grid:
      return s.rows ? "grid:" + std::to_string(s.rows) + "x" + std::to_string(s.cols) : "grid";
    case GraphSpec::Family::ba: return "ba:" + std::to_string(s.n) + ":" + std::to_string(s.k);
    case GraphSpec::Family::file: return "file:" + s.path;
  }
  return "?";
}

inline Graph make_graph(const GraphSpec& s) {
  Graph g;
  switch (s.family) {
    case GraphSpec::Family::grid:
      if (!s.rows) throw UsageError("grid graph needs dimensions");
      g = grid_graph(s.rows, s.cols);
      break;
    case GraphSpec::Family::ba: g = barabasi_albert(s.n, s.k, s.graph_seed); break;
    case GraphSpec::Family::file: g = read_graph(s.path); break;
  }
  return s.weighted ? randomize_weights(g, 1.0, 8.0, s.weight_seed) : g;
}

inline GridShape grid_shape(const GraphSpec& s) {
  return s.is_grid() ? GridShape{s.rows, s.cols} : GridShape{};
}

/// Uniform [-1, 1] entries, mean removed.
inline std::vector<double> random_demand(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> b(n);
  for (double& x : b) x = d(rng);
  remove_mean(b);
  return b;
}

// ---------------------------------------------------------------------------
// Experiment configuration

enum class Experiment { solve, stretch, convergence, scaling, smoothing };
enum class Format { csv, json };

inline std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::solve: return "solve";
    case Experiment::stretch: return "stretch";
    case Experiment::convergence: return "convergence";
    case Experiment::scaling: return "scaling";
    case Experiment::smoothing: return "smoothing";
  }
  return "?";
}
inline Experiment parse_experiment(const std::string& s) {
  for (Experiment e : {Experiment::solve, Experiment::stretch, Experiment::convergence, Experiment::scaling,
                       Experiment::smoothing})
    if (to_string(e) == s) return e;
  throw UsageError("unknown experiment '" + s + "'");
}

struct ExperimentConfig {
  Experiment experiment = Experiment::solve;
  GraphSpec graph;
  std::vector<TreeKind> trees;        // empty: every applicable tree
  std::vector<Selection> selections;  // empty: both
  std::string method = "kosz";        // solve only: kosz | cg
  SolverConfig solver;
  CGConfig cg;
  std::uint64_t rhs_seed = 1;
  std::vector<std::size_t> sizes{50, 71, 100, 141, 200};
  std::size_t trials = 3;
  std::vector<std::uint64_t> iteration_counts{0, 1, 10, 100, 1000, 10000};
  double hf_cutoff = 0.5;
  Format format = Format::csv;
};

inline Json to_json(const ExperimentConfig& c) {
  Json j;
  j["experiment"] = to_string(c.experiment);
  Json g;
  g["spec"] = to_string(c.graph);
  g["weighted"] = c.graph.weighted;
  g["graph_seed"] = c.graph.graph_seed;
  g["weight_seed"] = c.graph.weight_seed;
  j["graph"] = g;
  j["trees"] = Json::array();
  for (TreeKind t : c.trees) j["trees"].push_back(to_string(t));
  j["selections"] = Json::array();
  for (Selection s : c.selections) j["selections"].push_back(to_string(s));
  j["method"] = c.method;
  Json s;
  s["tree"] = to_string(c.solver.tree);
  s["selection"] = to_string(c.solver.selection);
  s["flow"] = to_string(c.solver.flow);
  s["tolerance"] = c.solver.tolerance;
  s["max_iterations"] = c.solver.max_iterations;
  s["residual_check_interval"] = c.solver.residual_check_interval;
  s["rng_seed"] = c.solver.rng_seed;
  s["dijkstra_root"] = c.solver.dijkstra_root;
  j["solver"] = s;
  j["cg"] = {{"tolerance", c.cg.tolerance},
             {"max_iterations", c.cg.max_iterations},
             {"true_residual_interval", c.cg.true_residual_interval}};
  j["rhs_seed"] = c.rhs_seed;
  j["sizes"] = c.sizes;
  j["trials"] = c.trials;
  j["iteration_counts"] = c.iteration_counts;
  j["hf_cutoff"] = c.hf_cutoff;
  j["format"] = c.format == Format::csv ? "csv" : "json";
  return j;
}

/// Missing keys keep their defaults.
inline ExperimentConfig config_from_json(const Json& j) {
  ExperimentConfig c;
  try {
    if (j.contains("experiment")) c.experiment = parse_experiment(j.at("experiment").get<std::string>());
    if (j.contains("graph")) {
      const Json& g = j.at("graph");
      if (g.contains("spec")) c.graph = parse_graph_spec(g.at("spec").get<std::string>());
      c.graph.weighted = g.value("weighted", false);
      c.graph.graph_seed = g.value("graph_seed", c.graph.graph_seed);
      c.graph.weight_seed = g.value("weight_seed", c.graph.weight_seed);
    }
    if (j.contains("trees"))
      for (const auto& t : j.at("trees")) c.trees.push_back(parse_tree_kind(t.get<std::string>()));
    if (j.contains("selections"))
      for (const auto& s : j.at("selections")) c.selections.push_back(parse_selection(s.get<std::string>()));
    c.method = j.value("method", c.method);
    if (j.contains("solver")) {
      const Json& s = j.at("solver");
      if (s.contains("tree")) c.solver.tree = parse_tree_kind(s.at("tree").get<std::string>());
      if (s.contains("selection")) c.solver.selection = parse_selection(s.at("selection").get<std::string>());
      if (s.contains("flow")) c.solver.flow = parse_flow(s.at("flow").get<std::string>());
      c.solver.tolerance = s.value("tolerance", c.solver.tolerance);
      c.solver.max_iterations = s.value("max_iterations", c.solver.max_iterations);
      c.solver.residual_check_interval = s.value("residual_check_interval", c.solver.residual_check_interval);
      c.solver.rng_seed = s.value("rng_seed", c.solver.rng_seed);
      c.solver.dijkstra_root = s.value("dijkstra_root", c.solver.dijkstra_root);
    }
    if (j.contains("cg")) {
      const Json& g = j.at("cg");
      c.cg.tolerance = g.value("tolerance", c.cg.tolerance);
      c.cg.max_iterations = g.value("max_iterations", c.cg.max_iterations);
      c.cg.true_residual_interval = g.value("true_residual_interval", c.cg.true_residual_interval);
    }
    c.rhs_seed = j.value("rhs_seed", c.rhs_seed);
    if (j.contains("sizes")) c.sizes = j.at("sizes").get<std::vector<std::size_t>>();
    c.trials = j.value("trials", c.trials);
    if (j.contains("iteration_counts")) c.iteration_counts = j.at("iteration_counts").get<std::vector<std::uint64_t>>();
    c.hf_cutoff = j.value("hf_cutoff", c.hf_cutoff);
    if (j.contains("format")) {
      const auto f = j.at("format").get<std::string>();
      if (f != "csv" && f != "json") throw UsageError("unknown format '" + f + "'");
      c.format = f == "csv" ? Format::csv : Format::json;
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("bad config: ") + e.what());
  }
  return c;
}

inline ExperimentConfig read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config '" + path + "'");
  try {
    return config_from_json(Json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError(std::string("bad config: ") + e.what());
  }
}

inline bool tree_applicable(TreeKind t, const GraphSpec& g) { return t != TreeKind::special_grid || g.is_grid(); }

inline std::vector<TreeKind> trees_for(const ExperimentConfig& c) {
  if (!c.trees.empty()) return c.trees;
  std::vector<TreeKind> out{TreeKind::kruskal, TreeKind::dijkstra, TreeKind::elkin};
  if (c.graph.is_grid()) out.push_back(TreeKind::special_grid);
  return out;
}

/// Checks everything that can be checked without building the graph.
inline void validate(const ExperimentConfig& c) {
  for (TreeKind t : c.trees)
    if (!tree_applicable(t, c.graph)) throw UsageError("special spanning tree needs a grid graph");
  if (!tree_applicable(c.solver.tree, c.graph)) throw UsageError("special spanning tree needs a grid graph");
  if (!(c.solver.tolerance > 0.0) || !(c.cg.tolerance > 0.0)) throw UsageError("tolerance must be positive");
  if (c.method != "kosz" && c.method != "cg") throw UsageError("unknown method '" + c.method + "'");
  const bool sized = c.experiment == Experiment::scaling;
  if (!sized && c.graph.is_grid() && c.graph.rows == 0) throw UsageError("grid graph needs dimensions (grid:KxL)");
  if (sized) {
    if (c.graph.family == GraphSpec::Family::file) throw UsageError("scaling needs a generated graph family");
    if (c.sizes.empty()) throw UsageError("scaling needs at least one size");
    if (!std::is_sorted(c.sizes.begin(), c.sizes.end()) ||
        std::adjacent_find(c.sizes.begin(), c.sizes.end()) != c.sizes.end())
      throw UsageError("sizes must be strictly increasing");
    if (c.trials == 0) throw UsageError("trials must be positive");
  }
  if (c.experiment == Experiment::smoothing && !c.graph.is_grid()) throw UsageError("smoothing needs a grid graph");
  if (!(c.hf_cutoff > 0.0 && c.hf_cutoff < 1.0)) throw UsageError("cutoff must be in (0, 1)");
}

// ---------------------------------------------------------------------------
// Tables

using Value = std::variant<std::int64_t, double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Value>> rows;

  void add(std::vector<Value> row) {
    if (row.size() != columns.size()) throw InvalidArgument("table row has wrong width");
    rows.push_back(std::move(row));
  }
  std::size_t column(const std::string& name) const {
    auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw InvalidArgument("no column '" + name + "'");
    return static_cast<std::size_t>(it - columns.begin());
  }
  /// Copy without the named columns.
  Table without(const std::vector<std::string>& drop) const {
    Table out;
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (std::find(drop.begin(), drop.end(), columns[i]) == drop.end()) {
        keep.push_back(i);
        out.columns.push_back(columns[i]);
      }
    for (const auto& r : rows) {
      std::vector<Value> nr;
      for (std::size_t i : keep) nr.push_back(r[i]);
      out.rows.push_back(std::move(nr));
    }
    return out;
  }
  friend bool operator==(const Table&, const Table&) = default;
};

inline double as_double(const Value& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&v)) return *d;
  throw InvalidArgument("value is not numeric");
}

namespace detail {

inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s = buf;
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

inline std::string csv_field(const Value& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&v)) return format_double(*d);
  const std::string& s = std::get<std::string>(v);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

inline Value parse_field(const std::string& f, bool quoted) {
  if (quoted || f.empty()) return f;
  std::int64_t i = 0;
  auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), i);
  if (ec == std::errc{} && p == f.data() + f.size()) return i;
  char* end = nullptr;
  const double d = std::strtod(f.c_str(), &end);
  if (end == f.c_str() + f.size()) return d;
  return f;
}

inline std::vector<std::pair<std::string, bool>> split_csv_line(const std::string& line) {
  std::vector<std::pair<std::string, bool>> out;
  std::string cur;
  bool quoted = false, in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (in_quotes) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        in_quotes = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      in_quotes = quoted = true;
    } else if (ch == ',') {
      out.emplace_back(std::move(cur), quoted);
      cur.clear();
      quoted = false;
    } else {
      cur += ch;
    }
  }
  out.emplace_back(std::move(cur), quoted);
  return out;
}

}  // namespace detail

inline void write_csv(const Table& t, std::ostream& out) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
  out << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << detail::csv_field(r[i]);
    out << '\n';
  }
}

inline Table read_csv(std::istream& in) {
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing CSV header");
  for (auto& [name, q] : detail::split_csv_line(line)) t.columns.push_back(name);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = detail::split_csv_line(line);
    if (fields.size() != t.columns.size()) throw ParseError(lineno, "wrong number of CSV fields");
    std::vector<Value> row;
    for (auto& [f, q] : fields) row.push_back(detail::parse_field(f, q));
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline Json to_json(const Table& t) {
  Json rows = Json::array();
  for (const auto& r : t.rows) {
    Json o = Json::object();
    for (std::size_t i = 0; i < r.size(); ++i)
      std::visit([&](const auto& v) { o[t.columns[i]] = v; }, r[i]);
    rows.push_back(std::move(o));
  }
  return rows;
}

/// Columns are taken from the first row; an empty array gives an empty table.
inline Table table_from_json(const Json& rows) {
  Table t;
  if (rows.empty()) return t;
  for (const auto& [k, v] : rows.front().items()) t.columns.push_back(k);
  for (const auto& o : rows) {
    std::vector<Value> r;
    for (const auto& c : t.columns) {
      const Json& v = o.at(c);
      if (v.is_number_integer()) r.emplace_back(v.get<std::int64_t>());
      else if (v.is_number()) r.emplace_back(v.get<double>());
      else r.emplace_back(v.get<std::string>());
    }
    t.rows.push_back(std::move(r));
  }
  return t;
}

// ---------------------------------------------------------------------------
// Power-law fit

struct FitResult {
  double a = 0.0, b = 0.0, c = 0.0;
  double rss = 0.0;
  std::size_t points = 0;
  std::size_t iterations = 0;

  double operator()(double x) const { return a * std::pow(x, b) + c; }
};

inline Json to_json(const FitResult& f) {
  return Json{{"a", f.a}, {"b", f.b}, {"c", f.c}, {"rss", f.rss}, {"points", f.points}};
}

namespace detail {
// Residuals a X^b + c - Y on data scaled to max 1.
struct PowerLawFunctor {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  const std::vector<double>& x;
  const std::vector<double>& y;

  int inputs() const { return 3; }
  int values() const { return static_cast<int>(x.size()); }
  int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& f) const {
    for (std::size_t i = 0; i < x.size(); ++i) f[static_cast<Eigen::Index>(i)] = p[0] * std::pow(x[i], p[1]) + p[2] - y[i];
    return 0;
  }
  int df(const Eigen::VectorXd& p, Eigen::MatrixXd& j) const {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      const double xb = std::pow(x[i], p[1]);
      j(r, 0) = xb;
      j(r, 1) = p[0] * xb * std::log(x[i]);
      j(r, 2) = 1.0;
    }
    return 0;
  }
};
}  // namespace detail

/// Least-squares fit of y = a x^b + c by Levenberg-Marquardt, started from the
/// log-log regression line with c = 0.
inline FitResult fit_power_law(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw InvalidArgument("fit_power_law: size mismatch");
  if (xs.size() < 3) throw InvalidArgument("fit_power_law: needs at least 3 points");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) throw InvalidArgument("fit_power_law: non-finite data");
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) throw InvalidArgument("fit_power_law: data must be positive");
    if (i && !(xs[i] > xs[i - 1])) throw InvalidArgument("fit_power_law: xs must be strictly increasing");
  }
  const std::size_t n = xs.size();
  const double xmax = xs.back();
  const double ymax = *std::max_element(ys.begin(), ys.end());
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = xs[i] / xmax;
    y[i] = ys[i] / ymax;
  }

  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  const double b0 = sxy / sxx;
  Eigen::VectorXd p(3);
  p << std::exp(my - b0 * mx), b0, 0.0;

  detail::PowerLawFunctor fn{x, y};
  Eigen::LevenbergMarquardt<detail::PowerLawFunctor> lm(fn);
  lm.parameters.xtol = 1e-10;
  lm.parameters.maxfev = 200;
  lm.minimize(p);

  FitResult r;
  r.b = p[1];
  r.a = ymax * p[0] / std::pow(xmax, r.b);
  r.c = ymax * p[2];
  r.points = n;
  r.iterations = static_cast<std::size_t>(lm.iter);
  for (std::size_t i = 0; i < n; ++i) {
    const double e = r(xs[i]) - ys[i];
    r.rss += e * e;
  }
  if (!std::isfinite(r.b)) throw SolverError("fit_power_law: exponent is not finite");
  return r;
}

// ---------------------------------------------------------------------------
// Experiments

/// Rows plus optional experiment-specific extras (fits, summaries).
struct Report {
  Table rows;
  Json extra = Json::object();
};

inline SolverConfig solver_config_for(const ExperimentConfig& c, const GraphSpec& g) {
  SolverConfig s = c.solver;
  s.grid = grid_shape(g);
  return s;
}

inline Report run_stretch(const ExperimentConfig& c) {
  validate(c);
  const Graph g = make_graph(c.graph);
  Report r;
  r.rows.columns = {"graph", "tree", "n", "m", "total_stretch", "average_stretch"};
  for (TreeKind kind : trees_for(c)) {
    SolverConfig s = solver_config_for(c, c.graph);
    s.tree = kind;
    const StretchReport st = stretch(g, build_tree(g, s));
    r.rows.add({to_string(c.graph), to_string(kind), static_cast<std::int64_t>(g.num_vertices()),
                static_cast<std::int64_t>(g.num_edges()), st.total, st.average});
  }
  return r;
}

inline Report run_convergence(const ExperimentConfig& c) {
  validate(c);
  const Graph g = make_graph(c.graph);
  const std::vector<double> b = random_demand(g.num_vertices(), c.rhs_seed);
  std::vector<Selection> sels = c.selections;
  if (sels.empty()) sels = {Selection::uniform, Selection::weighted};
  Report r;
  r.rows.columns = {"tree", "selection", "iteration", "residual"};
  Json runs = Json::array();
  for (TreeKind kind : trees_for(c)) {
    SolverConfig s = solver_config_for(c, c.graph);
    s.tree = kind;
    const SpanningTree t = build_tree(g, s);
    for (Selection sel : sels) {
      s.selection = sel;
      const SolverResult res = kosz_solve(g, b, t, s);
      for (const auto& [it, rr] : res.residual_history)
        r.rows.add({to_string(kind), to_string(sel), static_cast<std::int64_t>(it), rr});
      runs.push_back({{"tree", to_string(kind)},
                      {"selection", to_string(sel)},
                      {"iterations", res.iterations},
                      {"converged", res.converged},
                      {"seconds", res.counters.seconds}});
    }
  }
  r.extra["runs"] = std::move(runs);
  return r;
}

namespace detail {
inline std::pair<double, double> mean_std(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return {m, std::sqrt(s / static_cast<double>(v.size()))};
}
}  // namespace detail

/// Square grids of the given side lengths (or BA graphs of the given sizes),
/// KOSZ and CG to the configured tolerance, several seeded trials per size.
inline Report run_scaling(const ExperimentConfig& c) {
  validate(c);
  Report r;
  r.rows.columns = {"solver",     "size",      "n",           "m",          "trials",
                    "iterations_mean", "iterations_std", "flops_mean", "flops_std", "tree_ops_mean",
                    "tree_ops_std", "seconds_mean", "seconds_std"};
  std::vector<double> ns, kosz_flops, cg_flops;
  for (std::size_t size : c.sizes) {
    GraphSpec spec = c.graph;
    if (spec.is_grid()) spec.rows = spec.cols = size;
    else spec.n = size;
    std::vector<double> kit, kfl, kto, ksec, cit, cfl, csec;
    std::size_t n = 0, m = 0;
    for (std::size_t trial = 0; trial < c.trials; ++trial) {
      GraphSpec ts = spec;
      ts.graph_seed += trial;
      ts.weight_seed += trial;
      const Graph g = make_graph(ts);
      n = g.num_vertices();
      m = g.num_edges();
      const std::vector<double> b = random_demand(n, c.rhs_seed + trial);
      SolverConfig s = solver_config_for(c, ts);
      s.rng_seed += trial;
      const SolverResult k = kosz_solve(g, b, s);
      if (!k.converged) throw SolverError("kosz did not converge at size " + std::to_string(size));
      kit.push_back(static_cast<double>(k.iterations));
      kfl.push_back(static_cast<double>(k.counters.flops));
      kto.push_back(static_cast<double>(k.counters.tree_ops));
      ksec.push_back(k.counters.seconds);
      const SolverResult cg = cg_solve(g, b, c.cg);
      if (!cg.converged) throw SolverError("cg did not converge at size " + std::to_string(size));
      cit.push_back(static_cast<double>(cg.iterations));
      cfl.push_back(static_cast<double>(cg.counters.flops));
      csec.push_back(cg.counters.seconds);
    }
    auto emit = [&](const std::string& solver, const auto& it, const auto& fl, const auto& to, const auto& sec) {
      const auto [im, is] = detail::mean_std(it);
      const auto [fm, fs] = detail::mean_std(fl);
      const auto [tm, ts] = detail::mean_std(to);
      const auto [sm, ss] = detail::mean_std(sec);
      r.rows.add({solver, static_cast<std::int64_t>(size), static_cast<std::int64_t>(n), static_cast<std::int64_t>(m),
                  static_cast<std::int64_t>(c.trials), im, is, fm, fs, tm, ts, sm, ss});
      return fm;
    };
    ns.push_back(static_cast<double>(n));
    kosz_flops.push_back(emit("kosz", kit, kfl, kto, ksec));
    cg_flops.push_back(emit("cg", cit, cfl, std::vector<double>(c.trials, 0.0), csec));
  }
  if (ns.size() >= 3) {
    r.extra["fits"] = {{"kosz", to_json(fit_power_law(ns, kosz_flops))}, {"cg", to_json(fit_power_law(ns, cg_flops))}};
  }
  return r;
}

/// One Richardson step from a noisy start on a grid; the error x1 - x and its
/// spectrum for every configured inner iteration count.
inline Report run_smoothing(const ExperimentConfig& c) {
  validate(c);
  const std::size_t k = c.graph.rows, l = c.graph.cols;
  const Graph g = make_graph(c.graph);
  const std::vector<double> x = random_demand(g.num_vertices(), c.rhs_seed);
  const std::vector<double> b = laplacian_apply(g, x);
  const std::vector<double> x0 = add_noise(x, c.rhs_seed + 1);
  const SolverConfig s = solver_config_for(c, c.graph);
  const SpanningTree t = build_tree(g, s);

  Report r;
  r.rows.columns = {"iterations", "row", "col", "error", "magnitude"};
  Json summary = Json::array();
  for (std::uint64_t count : c.iteration_counts) {
    const std::vector<double> x1 = count == 0 ? x0 : richardson_step(g, b, x0, t, s, count);
    std::vector<double> err(x1.size());
    for (std::size_t i = 0; i < err.size(); ++i) err[i] = x1[i] - x[i];
    const Spectrum sp = dft2_magnitude(err, k, l);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < l; ++j)
        r.rows.add({static_cast<std::int64_t>(count), static_cast<std::int64_t>(i), static_cast<std::int64_t>(j),
                    err[i * l + j], sp.at(i, j)});
    const double hf = hf_energy_ratio(sp, c.hf_cutoff);
    summary.push_back({{"iterations", count},
                       {"error_norm", norm2(err)},
                       {"hf_ratio", hf},
                       {"lf_energy", (1.0 - hf) * sp.energy() / static_cast<double>(k * l)}});
  }
  r.extra["summary"] = std::move(summary);
  return r;
}

inline SolverResult run_solve(const ExperimentConfig& c) {
  validate(c);
  const Graph g = make_graph(c.graph);
  const std::vector<double> b = random_demand(g.num_vertices(), c.rhs_seed);
  if (c.method == "cg") return cg_solve(g, b, c.cg);
  return kosz_solve(g, b, solver_config_for(c, c.graph));
}

inline Report run_experiment(const ExperimentConfig& c) {
  switch (c.experiment) {
    case Experiment::stretch: return run_stretch(c);
    case Experiment::convergence: return run_convergence(c);
    case Experiment::scaling: return run_scaling(c);
    case Experiment::smoothing: return run_smoothing(c);
    case Experiment::solve: break;
  }
  throw InvalidArgument("run_experiment: solve has its own entry point");
}

// ---------------------------------------------------------------------------
// Output

inline Json to_json(const SolverResult& r) {
  Json h = Json::array();
  for (const auto& [it, rr] : r.residual_history) h.push_back({it, rr});
  return Json{{"x", r.x},
              {"iterations", r.iterations},
              {"converged", r.converged},
              {"final_residual", r.final_residual()},
              {"residual_history", std::move(h)},
              {"counters",
               {{"flops", r.counters.flops}, {"tree_ops", r.counters.tree_ops}, {"seconds", r.counters.seconds}}}};
}

inline SolverResult solver_result_from_json(const Json& j) {
  SolverResult r;
  r.x = j.at("x").get<std::vector<double>>();
  r.iterations = j.at("iterations").get<std::uint64_t>();
  r.converged = j.at("converged").get<bool>();
  for (const auto& p : j.at("residual_history")) r.residual_history.emplace_back(p.at(0).get<std::uint64_t>(), p.at(1).get<double>());
  const Json& c = j.at("counters");
  r.counters.flops = c.at("flops").get<std::uint64_t>();
  r.counters.tree_ops = c.at("tree_ops").get<std::uint64_t>();
  r.counters.seconds = c.at("seconds").get<double>();
  return r;
}

inline void write_report(const ExperimentConfig& c, const Report& r, std::ostream& out) {
  if (c.format == Format::csv) {
    write_csv(r.rows, out);
    return;
  }
  Json j;
  j["config"] = to_json(c);
  j["rows"] = to_json(r.rows);
  for (const auto& [k, v] : r.extra.items()) j[k] = v;
  out << j.dump(2) << '\n';
}

inline void write_solve(const ExperimentConfig& c, const SolverResult& r, std::ostream& out) {
  if (c.format == Format::csv) {
    Table t;
    t.columns = {"vertex", "x"};
    for (std::size_t i = 0; i < r.x.size(); ++i) t.add({static_cast<std::int64_t>(i), r.x[i]});
    write_csv(t, out);
    return;
  }
  Json j;
  j["config"] = to_json(c);
  j["result"] = to_json(r);
  out << j.dump(2) << '\n';
}

namespace detail {
inline bool is_timing_key(const std::string& k) { return k.find("seconds") != std::string::npos; }

inline void strip_timing(Json& j) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end();) {
      if (is_timing_key(it.key())) it = j.erase(it);
      else strip_timing(*it++);
    }
  } else if (j.is_array()) {
    for (auto& v : j) strip_timing(v);
  }
}
}  // namespace detail

/// Everything in the report except wall-clock fields, serialized.
inline std::string payload(const Report& r) {
  std::vector<std::string> timing;
  for (const auto& col : r.rows.columns)
    if (detail::is_timing_key(col)) timing.push_back(col);
  std::ostringstream out;
  write_csv(r.rows.without(timing), out);
  Json extra = r.extra;
  detail::strip_timing(extra);
  out << extra.dump() << '\n';
  return out.str();
}

inline std::string payload(const SolverResult& r) {
  Json j = to_json(r);
  detail::strip_timing(j);
  return j.dump();
}

}  // namespace kosz

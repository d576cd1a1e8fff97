#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "kosz/graph.hpp"
#include "kosz/solver.hpp"

namespace kosz {

/// x + eta with eta_i i.i.d. uniform in [-1, 1].
inline std::vector<double> add_noise(std::span<const double> x, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> noise(-1.0, 1.0);
  std::vector<double> out(x.begin(), x.end());
  for (double& v : out) v += noise(rng);
  return out;
}

/// One Richardson step x1 = x0 + L^+ (b - L x0), where the inner solve is
/// exactly `iterations` KOSZ cycle repairs on tree t.
inline std::vector<double> richardson_step(const Graph& g, std::span<const double> b, std::span<const double> x0,
                                           const SpanningTree& t, SolverConfig cfg, std::uint64_t iterations) {
  if (x0.size() != g.num_vertices() || b.size() != g.num_vertices())
    throw InvalidArgument("richardson_step: dimension mismatch");
  check_demand(b);
  std::vector<double> r = laplacian_apply(g, x0);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  remove_mean(r);  // sum(r) = 0 in exact arithmetic
  std::vector<double> x1(x0.begin(), x0.end());
  if (norm2(r) == 0.0) return x1;

  cfg.stop_on_tolerance = false;
  cfg.max_iterations = iterations;
  cfg.residual_check_interval = std::numeric_limits<std::uint64_t>::max();
  const SolverResult inner = kosz_solve(g, r, t, cfg);
  for (std::size_t i = 0; i < x1.size(); ++i) x1[i] += inner.x[i];
  return x1;
}

inline std::vector<double> richardson_step(const Graph& g, std::span<const double> b, std::span<const double> x0,
                                           const SolverConfig& cfg, std::uint64_t iterations) {
  return richardson_step(g, b, x0, build_tree(g, cfg), cfg, iterations);
}

/// |DFT| of a k x l field, shifted so the zero frequency sits at (k/2, l/2).
struct Spectrum {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> magnitudes;  // row-major, DC-centered

  double at(std::size_t r, std::size_t c) const { return magnitudes[r * cols + c]; }
  double energy() const {
    double s = 0.0;
    for (double m : magnitudes) s += m * m;
    return s;
  }
};

/// Direct (row-column) 2D DFT; O(kl(k+l)).
inline Spectrum dft2_magnitude(std::span<const double> field, std::size_t k, std::size_t l) {
  if (k == 0 || l == 0 || field.size() != k * l) throw InvalidArgument("dft2_magnitude: dimension mismatch");
  using C = std::complex<double>;
  auto twiddles = [](std::size_t len) {
    std::vector<C> w(len);
    for (std::size_t i = 0; i < len; ++i) {
      const double a = -2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(len);
      w[i] = {std::cos(a), std::sin(a)};
    }
    return w;
  };
  const std::vector<C> wr = twiddles(k), wc = twiddles(l);

  std::vector<C> rows(k * l);
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t f = 0; f < l; ++f) {
      C s = 0.0;
      for (std::size_t c = 0; c < l; ++c) s += field[r * l + c] * wc[(f * c) % l];
      rows[r * l + f] = s;
    }

  Spectrum out{k, l, std::vector<double>(k * l)};
  for (std::size_t fc = 0; fc < l; ++fc)
    for (std::size_t fr = 0; fr < k; ++fr) {
      C s = 0.0;
      for (std::size_t r = 0; r < k; ++r) s += rows[r * l + fc] * wr[(fr * r) % k];
      const std::size_t sr = (fr + k / 2) % k, sc = (fc + l / 2) % l;
      out.magnitudes[sr * l + sc] = std::abs(s);
    }
  return out;
}

/// Fraction of spectral energy in bins whose normalized centered frequency
/// max(|fr| / (k/2), |fc| / (l/2)) exceeds cutoff.
inline double hf_energy_ratio(const Spectrum& s, double cutoff) {
  if (!(cutoff > 0.0 && cutoff < 1.0)) throw InvalidArgument("hf_energy_ratio: cutoff must be in (0, 1)");
  const double total = s.energy();
  if (!(total > 0.0)) throw InvalidArgument("hf_energy_ratio: spectrum is all zero");
  const double hr = static_cast<double>(s.rows) / 2.0, hc = static_cast<double>(s.cols) / 2.0;
  double high = 0.0;
  for (std::size_t r = 0; r < s.rows; ++r) {
    const double fr = std::abs(static_cast<double>(r) - static_cast<double>(s.rows / 2)) / hr;
    for (std::size_t c = 0; c < s.cols; ++c) {
      const double fc = std::abs(static_cast<double>(c) - static_cast<double>(s.cols / 2)) / hc;
      if (std::max(fr, fc) > cutoff) high += s.at(r, c) * s.at(r, c);
    }
  }
  return high / total;
}

}  // namespace kosz

#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "mhdbl/calculus.hpp"

namespace mhdbl {

/// Weight mu_lambda(t, y) = exp(lambda y^2 / (4 <t>)), <t> = 1 + t.
struct WeightSpec {
  double lambda = 1.0;
  double t = 0.0;
};

/// H^{m,k} norm over mu_lambda: all x-derivatives up to m, y-derivatives up to k.
struct NormSpec {
  int m = 0;
  int k = 0;
  WeightSpec weight;
};

inline double bracket(double t) { return 1.0 + t; }

inline double mu_lambda(const WeightSpec& w, double y) {
  return std::exp(w.lambda * y * y / (4.0 * bracket(w.t)));
}

/// sqrt(mu_lambda) sampled on the y nodes.
inline std::vector<double> half_weight(const Grid& g, const WeightSpec& w) {
  std::vector<double> out(g.ny);
  const double c = w.lambda / (8.0 * bracket(w.t));
  for (int j = 0; j < g.ny; ++j) out[j] = std::exp(c * g.y_nodes[j] * g.y_nodes[j]);
  return out;
}

/// Squared weighted L2 norm of one y-profile: quad of (sqrt(mu) h)^2.
inline double weighted_l2_sq_profile(const Grid& g, std::span<const double> h, const WeightSpec& w) {
  const auto hw = half_weight(g, w);
  double s = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    // Skipping exact zeros keeps wide domains finite where the weight overflows.
    if (h[j] == 0.0) continue;
    const double a = hw[j] * h[j];
    s += g.y_quad[j] * a * a;
  }
  return s;
}

/// Weighted inner product of two y-profiles.
inline double weighted_inner_profile(const Grid& g, std::span<const double> a, std::span<const double> b,
                                     const WeightSpec& w) {
  const auto hw = half_weight(g, w);
  double s = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    if (a[j] != 0.0 && b[j] != 0.0) s += g.y_quad[j] * (hw[j] * a[j]) * (hw[j] * b[j]);
  }
  return s;
}

/// (h1, h2)_{L2_mu} over the x period and [0, ymax].
inline double weighted_inner(const Field& a, const Field& b, const WeightSpec& w) {
  a.check(b);
  const Grid& g = a.grid();
  const auto hw = half_weight(g, w);
  double s = 0.0;
  for (int i = 0; i < g.nx; ++i) {
    const auto ra = a.row(i);
    const auto rb = b.row(i);
    for (int j = 0; j < g.ny; ++j) s += g.y_quad[j] * (hw[j] * ra[j]) * (hw[j] * rb[j]);
  }
  return s * g.dx();
}

inline double weighted_l2_sq(const Field& h, const WeightSpec& w) {
  const Grid& g = h.grid();
  const auto hw = half_weight(g, w);
  double s = 0.0;
  for (int i = 0; i < g.nx; ++i) {
    const auto r = h.row(i);
    for (int j = 0; j < g.ny; ++j) {
      const double a = hw[j] * r[j];
      s += g.y_quad[j] * a * a;
    }
  }
  return s * g.dx();
}

inline double weighted_l2(const Field& h, const WeightSpec& w) { return std::sqrt(weighted_l2_sq(h, w)); }

/// Squared H^{m,0} norm via Parseval: one transform, every x-derivative
/// order summed mode by mode.  Agrees with the direct sum of
/// weighted_l2_sq(dx(h, i)) to rounding.
inline double weighted_hm0_sq(const Field& h, int m, const WeightSpec& w) {
  const Grid& g = h.grid();
  const Spectrum sp(h);
  const auto hw = half_weight(g, w);
  double s = 0.0;
  for (int k = 0; k < sp.nk(); ++k) {
    const double kk = g.wavenumber(k) * g.wavenumber(k);
    double factor = 0.0;
    double p = 1.0;
    for (int i = 0; i <= m; ++i) {
      // Odd derivatives drop the Nyquist mode, as dx does.
      if (!(k == g.nx / 2 && i % 2 == 1)) factor += p;
      p *= kk;
    }
    // Modes 0 and nx/2 appear once in the full spectrum, others twice.
    const double mult = (k == 0 || k == g.nx / 2) ? 1.0 : 2.0;
    double col = 0.0;
    for (int j = 0; j < g.ny; ++j) col += g.y_quad[j] * hw[j] * hw[j] * std::norm(sp.at(k, j));
    s += mult * factor * col;
  }
  return s * g.lx;
}

inline double weighted_sobolev_sq(const Field& h, const NormSpec& n) {
  if (n.m < 0 || n.m > 8 || n.k < 0 || n.k > 2) throw Error("weighted_sobolev: need m <= 8, k <= 2");
  double s = weighted_hm0_sq(h, n.m, n.weight);
  for (int j = 1; j <= n.k; ++j) s += weighted_hm0_sq(dy(h, j), n.m, n.weight);
  return s;
}

inline double weighted_sobolev(const Field& h, const NormSpec& n) { return std::sqrt(weighted_sobolev_sq(h, n)); }

/// Literal definition: sum of weighted_l2_sq(dx^i dy^j h).  Slower; kept as
/// the reference for the Parseval path.
inline double weighted_sobolev_sq_direct(const Field& h, const NormSpec& n) {
  double s = 0.0;
  for (int j = 0; j <= n.k; ++j) {
    const Field base = j == 0 ? h : dy(h, j);
    for (int i = 0; i <= n.m; ++i) s += weighted_l2_sq(dx(base, i), n.weight);
  }
  return s;
}

}  // namespace mhdbl

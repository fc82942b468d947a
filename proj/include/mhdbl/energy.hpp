#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "mhdbl/unknowns.hpp"

namespace mhdbl {

inline constexpr double kDeltaMax = 1.0 / 25.0;

/// Ordered (name, value) pairs; order is part of the CSV schema.
using Labeled = std::vector<std::pair<std::string, double>>;

inline double lookup(const Labeled& l, const std::string& key) {
  for (const auto& [k, v] : l) {
    if (k == key) return v;
  }
  throw Error("no entry named " + key);
}

struct EnergyBudget {
  double t = 0.0;
  double delta = kDeltaMax;
  double E_delta = 0.0;
  double D_delta = 0.0;
  Labeled components;  ///< E.* entries sum to E_delta, D.* entries to D_delta
};

/// u_m, f_m for m = 0..mmax sharing one reciprocal and one g.
inline std::vector<GoodUnknowns> compute_all_um_fm(const State& s, int mmax) {
  std::vector<GoodUnknowns> out;
  out.push_back({0, s.u, s.f});
  if (mmax == 0) return out;
  const Field inv = guarded_reciprocal(s.f);
  const Field g = -cumint_y(dx(s.f, 1));
  const Field a = dy(s.u, 1) * inv;
  const Field b = dy(s.f, 1) * inv;
  const XDerivs U(s.u, mmax), F(s.f, mmax), G(g, mmax - 1);
  for (int m = 1; m <= mmax; ++m) {
    out.push_back({m, U[m] + a * G[m - 1], F[m] + b * G[m - 1]});
  }
  return out;
}

inline void validate_delta(double delta) {
  if (!(delta > 0.0)) throw Error("delta must be positive");
  if (delta > kDeltaMax * (1.0 + 1e-12)) throw Error("delta exceeds 1/25");
}

/// E_delta and D_delta with every summand recorded.  The linearly-good
/// unknowns use the tail form.
inline EnergyBudget energy(const State& s, double delta = kDeltaMax) {
  validate_delta(delta);
  EnergyBudget b;
  b.t = s.t;
  b.delta = delta;
  const double tb = bracket(s.t);
  const WeightSpec mu{1.0, s.t};
  const double wm = std::pow(tb, 0.5 * (1.0 - delta));

  const auto um = compute_all_um_fm(s, 8);
  Labeled e, d;
  for (const auto& g : um) {
    const double n2 = weighted_l2_sq(g.u_m, mu) + weighted_l2_sq(g.f_m, mu);
    const double dn2 = weighted_l2_sq(dy(g.u_m, 1), mu) + weighted_l2_sq(dy(g.f_m, 1), mu);
    e.emplace_back("E.um" + std::to_string(g.m), wm * n2);
    d.emplace_back("D.um" + std::to_string(g.m), delta * wm * dn2);
  }

  const Field U = good_tail(s.u, s.t), F = good_tail(s.f, s.t);
  std::array<double, 3> h5{};
  h5[0] = weighted_hm0_sq(U, 5, mu) + weighted_hm0_sq(F, 5, mu);
  const Field Uy = dy(U, 1), Fy = dy(F, 1);
  h5[1] = weighted_hm0_sq(Uy, 5, mu) + weighted_hm0_sq(Fy, 5, mu);
  h5[2] = weighted_hm0_sq(dy(Uy, 1), 5, mu) + weighted_hm0_sq(dy(Fy, 1), 5, mu);
  for (int k = 0; k <= 1; ++k) {
    const double tw = std::pow(tb, 0.5 * (5.0 - delta) + k);
    e.emplace_back("E.UF" + std::to_string(k), std::pow(0.5 * delta, k) * tw * h5[k]);
    d.emplace_back("D.UF" + std::to_string(k), std::pow(0.5 * delta, k + 1) * tw * h5[k + 1]);
  }

  for (const auto& [k, v] : e) b.E_delta += v;
  for (const auto& [k, v] : d) b.D_delta += v;
  b.components = std::move(e);
  b.components.insert(b.components.end(), d.begin(), d.end());
  return b;
}

/// Ratios between primitive and good-unknown norms.
struct NormComparison {
  double lambda = 0.5;
  Labeled ratios;  ///< "uU.k0".."fF.k2", "um.m1".."fm.m8"
};

inline double guarded_ratio(double num, double den) {
  if (num < 1e-14 && den < 1e-14) return 0.0;
  if (den == 0.0) return std::numeric_limits<double>::infinity();
  return num / den;
}

inline NormComparison norm_comparison(const State& s, double lambda) {
  if (!(lambda >= 0.0 && lambda < 1.0)) throw Error("norm_comparison: lambda must lie in [0, 1)");
  NormComparison r;
  r.lambda = lambda;
  const WeightSpec mu{1.0, s.t}, ml{lambda, s.t};
  Field u = s.u, f = s.f;
  Field U = good_tail(s.u, s.t), F = good_tail(s.f, s.t);
  for (int k = 0; k <= 2; ++k) {
    if (k > 0) {
      u = dy(u, 1);
      f = dy(f, 1);
      U = dy(U, 1);
      F = dy(F, 1);
    }
    r.ratios.emplace_back("uU.k" + std::to_string(k),
                          guarded_ratio(std::sqrt(weighted_hm0_sq(u, 5, ml)), std::sqrt(weighted_hm0_sq(U, 5, mu))));
    r.ratios.emplace_back("fF.k" + std::to_string(k),
                          guarded_ratio(std::sqrt(weighted_hm0_sq(f, 5, ml)), std::sqrt(weighted_hm0_sq(F, 5, mu))));
  }
  const auto um = compute_all_um_fm(s, 8);
  const XDerivs ux(s.u, 8), fx(s.f, 8);
  for (int m = 1; m <= 8; ++m) {
    r.ratios.emplace_back("um.m" + std::to_string(m),
                          guarded_ratio(weighted_l2(ux[m], mu), weighted_l2(um[m].u_m, mu)));
    r.ratios.emplace_back("fm.m" + std::to_string(m),
                          guarded_ratio(weighted_l2(fx[m], mu), weighted_l2(um[m].f_m, mu)));
  }
  return r;
}

struct DiagnosticsFrame {
  double t = 0.0;
  EnergyBudget budget;
  Labeled primitive_norms;
  Labeled good_norms;
  double mean_drift_u = 0.0;
  double mean_drift_f = 0.0;
  double f_min = 1.0;  ///< min of 1+f
  double f_max = 1.0;  ///< max of 1+f
  std::vector<NormComparison> comparisons;
};

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double a : v) m = std::max(m, std::abs(a));
  return m;
}

/// Everything recorded at one output time.  `lambda` is the weight of the
/// primitive H^{5,0} norms; `comparison_lambdas` selects norm_comparison runs.
inline DiagnosticsFrame diagnose(const State& s, double delta, double lambda,
                                 const std::vector<double>& comparison_lambdas) {
  DiagnosticsFrame fr;
  fr.t = s.t;
  fr.budget = energy(s, delta);
  const WeightSpec mu{1.0, s.t}, ml{lambda, s.t};
  fr.primitive_norms.emplace_back("H80.uf", std::sqrt(weighted_hm0_sq(s.u, 8, mu) + weighted_hm0_sq(s.f, 8, mu)));
  Field u = s.u, f = s.f;
  Field U = good_tail(s.u, s.t), F = good_tail(s.f, s.t);
  for (int k = 0; k <= 2; ++k) {
    if (k > 0) {
      u = dy(u, 1);
      f = dy(f, 1);
      U = dy(U, 1);
      F = dy(F, 1);
    }
    fr.primitive_norms.emplace_back("H50lam.uf.k" + std::to_string(k),
                                    std::sqrt(weighted_hm0_sq(u, 5, ml) + weighted_hm0_sq(f, 5, ml)));
    fr.good_norms.emplace_back("H50.UF.k" + std::to_string(k),
                               std::sqrt(weighted_hm0_sq(U, 5, mu) + weighted_hm0_sq(F, 5, mu)));
  }
  fr.mean_drift_u = max_abs(column_means(s.u));
  fr.mean_drift_f = max_abs(column_means(s.f));
  fr.f_min = 1.0 + s.f.min();
  fr.f_max = 1.0 + s.f.max();
  for (double l : comparison_lambdas) fr.comparisons.push_back(norm_comparison(s, l));
  return fr;
}

/// Time series sample.
struct Sample {
  double t;
  double value;
};

/// Smallest E(0) - [E(t) + (1/2) int_0^t D] over the frames after the first
/// (trapezoid in t).  The first frame is excluded since its margin is 0 by
/// construction.
inline double bootstrap_check(const std::vector<EnergyBudget>& frames) {
  if (frames.size() < 2) throw Error("bootstrap_check: need at least two frames");
  const double eps2 = frames.front().E_delta;
  double integral = 0.0;
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t n = 1; n < frames.size(); ++n) {
    integral += 0.5 * (frames[n].t - frames[n - 1].t) * (frames[n].D_delta + frames[n - 1].D_delta);
    margin = std::min(margin, eps2 - (frames[n].E_delta + 0.5 * integral));
  }
  return margin;
}

/// max over t of [E(t) + (1/2) int_0^t D] / E(0); 0 for a zero trajectory.
inline double bootstrap_ratio(const std::vector<EnergyBudget>& frames) {
  if (frames.empty()) return 0.0;
  const double e0 = frames.front().E_delta;
  if (e0 == 0.0) return 0.0;
  double integral = 0.0, worst = 0.0;
  for (std::size_t n = 0; n < frames.size(); ++n) {
    if (n > 0) integral += 0.5 * (frames[n].t - frames[n - 1].t) * (frames[n].D_delta + frames[n - 1].D_delta);
    worst = std::max(worst, (frames[n].E_delta + 0.5 * integral) / e0);
  }
  return worst;
}

/// Least-squares slope of log(value) against log(1 + t) over [t0, t1].
inline double fit_decay(const std::vector<Sample>& series, double t0, double t1) {
  if (!(t1 > t0)) throw Error("fit_decay: empty window");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& s : series) {
    if (s.t < t0 || s.t > t1) continue;
    if (!(s.value > 0.0)) throw Error("fit_decay: values must be positive");
    const double x = std::log(bracket(s.t)), y = std::log(s.value);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) throw Error("fit_decay: fewer than two samples in window");
  const double den = n * sxx - sx * sx;
  return (n * sxy - sx * sy) / den;
}

namespace detail {

inline std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

inline std::string short_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace detail

inline constexpr int kCsvSchemaVersion = 1;

/// Writes frames as CSV.  The first line is a comment carrying the schema
/// version and the caller's config hash.
inline void write_csv(std::ostream& os, const std::vector<DiagnosticsFrame>& frames, const std::string& config_hash) {
  os << "# mhdbl-diagnostics schema=" << kCsvSchemaVersion << " config_hash=" << config_hash << "\n";
  if (frames.empty()) return;
  const auto& f0 = frames.front();
  os << "t,E_delta,D_delta";
  for (const auto& [k, v] : f0.budget.components) os << "," << k;
  for (const auto& [k, v] : f0.primitive_norms) os << "," << k;
  for (const auto& [k, v] : f0.good_norms) os << "," << k;
  os << ",mean_drift_u,mean_drift_f,one_plus_f_min,one_plus_f_max";
  for (const auto& c : f0.comparisons) {
    for (const auto& [k, v] : c.ratios) os << ",ratio.lam" << detail::short_num(c.lambda) << "." << k;
  }
  os << "\n";
  for (const auto& fr : frames) {
    os << detail::csv_num(fr.t) << "," << detail::csv_num(fr.budget.E_delta) << "," << detail::csv_num(fr.budget.D_delta);
    for (const auto& [k, v] : fr.budget.components) os << "," << detail::csv_num(v);
    for (const auto& [k, v] : fr.primitive_norms) os << "," << detail::csv_num(v);
    for (const auto& [k, v] : fr.good_norms) os << "," << detail::csv_num(v);
    os << "," << detail::csv_num(fr.mean_drift_u) << "," << detail::csv_num(fr.mean_drift_f) << ","
       << detail::csv_num(fr.f_min) << "," << detail::csv_num(fr.f_max);
    for (const auto& c : fr.comparisons) {
      for (const auto& [k, v] : c.ratios) os << "," << detail::csv_num(v);
    }
    os << "\n";
  }
}

}  // namespace mhdbl

#pragma once

// Cancellation unknowns
//   u_m = dx^m u + (dy u / (1+f)) dx^{m-1} g,   f_m = dx^m f + (dy f / (1+f)) dx^{m-1} g,
// the linearly-good unknowns
//   U = u + (y / 2<t>) int_0^y u  (direct)   or   u - (y / 2<t>) int_y^ymax u  (tail),
// their source terms and residuals of their evolution equations.

#include <array>
#include <initializer_list>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "mhdbl/solver.hpp"
#include "mhdbl/weights.hpp"

namespace mhdbl {

inline constexpr double kFloorGuard = 0.25;

/// 1 / (1 + f), shared by every division in this module.
inline Field guarded_reciprocal(const Field& f, double floor = kFloorGuard) {
  Field out(f.grid_ptr());
  for (std::size_t n = 0; n < f.size(); ++n) {
    const double d = 1.0 + f[n];
    if (!(d >= floor)) throw Error("1+f below guard " + std::to_string(floor));
    out[n] = 1.0 / d;
  }
  return out;
}

struct GoodUnknowns {
  int m = 0;
  Field u_m;
  Field f_m;
};

struct LinearGood {
  Field U;
  Field F;
};

struct UFForms {
  LinearGood direct;
  LinearGood tail;
};

inline GoodUnknowns compute_um_fm(const State& s, int m) {
  if (m < 0 || m > 8) throw Error("compute_um_fm: m must lie in [0, 8]");
  if (m == 0) return {0, s.u, s.f};
  const Field inv = guarded_reciprocal(s.f);
  const Field g = -cumint_y(dx(s.f, 1));
  const Field gm = dx(g, m - 1);
  Field um = dx(s.u, m);
  Field fm = dx(s.f, m);
  const Field uy = dy(s.u, 1), fy = dy(s.f, 1);
  for (std::size_t n = 0; n < um.size(); ++n) {
    um[n] += uy[n] * inv[n] * gm[n];
    fm[n] += fy[n] * inv[n] * gm[n];
  }
  return {m, std::move(um), std::move(fm)};
}

/// y / (2<t>) on the y nodes.
inline std::vector<double> uf_factor(const Grid& g, double t) {
  std::vector<double> c(g.ny);
  for (int j = 0; j < g.ny; ++j) c[j] = g.y_nodes[j] / (2.0 * bracket(t));
  return c;
}

inline Field good_direct(const Field& h, double t) {
  Field c = cumint_y(h);
  c.scale_y(uf_factor(h.grid(), t));
  return h + c;
}

inline Field good_tail(const Field& h, double t) {
  Field c = tailint_y(h);
  c.scale_y(uf_factor(h.grid(), t));
  return h - c;
}

inline UFForms compute_UF(const State& s) {
  return {{good_direct(s.u, s.t), good_direct(s.f, s.t)}, {good_tail(s.u, s.t), good_tail(s.f, s.t)}};
}

/// Table of x-derivatives dx^k of one field, k = 0..n.
class XDerivs {
 public:
  XDerivs() = default;
  XDerivs(const Field& h, int n) {
    d_.reserve(n + 1);
    d_.push_back(h);
    if (n > 0) {
      const Spectrum sp(h);
      for (int k = 1; k <= n; ++k) d_.push_back(Spectrum(sp).differentiate(k).to_field());
    }
  }
  const Field& operator[](int k) const { return d_.at(k); }

 private:
  std::vector<Field> d_;
};

inline double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// sum_{k=lo}^{hi} C(n, k) * P[k] * Q[shift - k], the common shape of every
/// binomial sum in the source terms.
inline Field binomial_sum(int n, int lo, int hi, int shift, const XDerivs& P, const XDerivs& Q,
                          const GridPtr& grid) {
  Field out(grid);
  for (int k = lo; k <= hi; ++k) {
    const double c = binomial(n, k);
    const Field& p = P[k];
    const Field& q = Q[shift - k];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += c * p[i] * q[i];
  }
  return out;
}

/// Everything the source terms and residuals need from one state.
struct SourceInputs {
  int m = 0;
  GridPtr grid;
  Field inv;  ///< 1/(1+f)
  Field uy, fy, uyy, fyy;
  XDerivs u, f, v, g, uyx, fyx;

  SourceInputs(const State& s, int m_) : m(m_), grid(s.u.grid_ptr()) {
    inv = guarded_reciprocal(s.f);
    uy = dy(s.u, 1);
    fy = dy(s.f, 1);
    uyy = dy(s.u, 2);
    fyy = dy(s.f, 2);
    const auto [vv, gg] = derive_vg(s.u, s.f);
    u = XDerivs(s.u, m + 1);
    f = XDerivs(s.f, m + 1);
    v = XDerivs(vv, m);
    g = XDerivs(gg, m);
    uyx = XDerivs(uy, m);
    fyx = XDerivs(fy, m);
  }
};

/// Shared bracket of S_{m,2} and its tilde analog:
/// sum C(m-1,k)(f_k v_{m-k} - g_k u_{m-k}) - sum C(m-1,k)(u_k g_{m-k} - v_k f_{m-k}).
inline Field s2_bracket(const SourceInputs& in) {
  const int m = in.m;
  Field b(in.grid);
  if (m < 2) return b;
  b += binomial_sum(m - 1, 1, m - 1, m, in.f, in.v, in.grid);
  b -= binomial_sum(m - 1, 1, m - 1, m, in.g, in.u, in.grid);
  b -= binomial_sum(m - 1, 1, m - 1, m, in.u, in.g, in.grid);
  b += binomial_sum(m - 1, 1, m - 1, m, in.v, in.f, in.grid);
  return b;
}

using SourceTriple = std::array<Field, 3>;

inline SourceTriple source_S(const SourceInputs& in) {
  const int m = in.m;
  const auto& gp = in.grid;
  Field s1 = binomial_sum(m, 1, m, m + 1, in.f, in.f, gp);
  s1 -= binomial_sum(m, 1, m, m + 1, in.u, in.u, gp);
  s1 += binomial_sum(m, 1, m - 1, m, in.g, in.fyx, gp);
  s1 -= binomial_sum(m, 1, m - 1, m, in.v, in.uyx, gp);

  Field s2 = s2_bracket(in);
  Field s3(gp);
  const Field& g = in.g[0];
  const Field& gm1 = in.g[m - 1];
  for (std::size_t n = 0; n < s3.size(); ++n) {
    const double iv = in.inv[n];
    const double uy = in.uy[n], fy = in.fy[n];
    const double a = uy * iv;
    s2[n] *= a;
    // d/dy (uy / (1+f))
    const double a_y = in.uyy[n] * iv - uy * fy * iv * iv;
    s3[n] = (g[n] * fy * iv + 2.0 * a_y) * in.f[m][n] - g[n] * uy * iv * in.u[m][n] -
            2.0 * fy * fy * uy * iv * iv * iv * gm1[n] +
            ((fy * in.f[1][n] - uy * in.u[1][n]) * iv +
             (g[n] * fy * fy - g[n] * uy * uy + 2.0 * fy * in.uyy[n]) * iv * iv) *
                gm1[n];
  }
  return {std::move(s1), std::move(s2), std::move(s3)};
}

inline SourceTriple source_S_tilde(const SourceInputs& in) {
  const int m = in.m;
  const auto& gp = in.grid;
  Field t1 = binomial_sum(m, 1, m, m + 1, in.f, in.u, gp);
  t1 -= binomial_sum(m, 1, m, m + 1, in.u, in.f, gp);
  t1 += binomial_sum(m, 1, m - 1, m, in.g, in.uyx, gp);
  t1 -= binomial_sum(m, 1, m - 1, m, in.v, in.fyx, gp);

  Field t2 = s2_bracket(in);
  Field t3(gp);
  const Field& g = in.g[0];
  const Field& gm1 = in.g[m - 1];
  for (std::size_t n = 0; n < t3.size(); ++n) {
    const double iv = in.inv[n];
    const double uy = in.uy[n], fy = in.fy[n];
    t2[n] *= fy * iv;
    const double b_y = in.fyy[n] * iv - fy * fy * iv * iv;
    t3[n] = (g[n] * uy * iv + 2.0 * b_y) * in.f[m][n] - g[n] * fy * iv * in.u[m][n] +
            ((in.u[1][n] * fy - uy * in.f[1][n]) * iv + 2.0 * fy * in.fyy[n] * iv * iv -
             2.0 * fy * fy * fy * iv * iv * iv) *
                gm1[n];
  }
  return {std::move(t1), std::move(t2), std::move(t3)};
}

inline SourceTriple source_S(const State& s, int m) {
  if (m < 1 || m > 8) throw Error("source_S: m must lie in [1, 8]");
  return source_S(SourceInputs(s, m));
}

inline SourceTriple source_S_tilde(const State& s, int m) {
  if (m < 1 || m > 8) throw Error("source_S_tilde: m must lie in [1, 8]");
  return source_S_tilde(SourceInputs(s, m));
}

/// Which discrete dyy the residual uses for its diffusion term.
enum class DiffusionStencil {
  fourth_order,  ///< the 4th-order diagnostic stencil
  solver,        ///< the 3-point stencil inverted by the time integrator
};

struct ResidualOptions {
  DiffusionStencil stencil = DiffusionStencil::fourth_order;
  /// Adds (dy u/(1+f)) dx^m dy f|_{y=0} (and the f analog) to the right-hand
  /// side.  This term is present whenever int_0^ymax u dy is not conserved,
  /// which is the generic case.
  bool wall_flux = true;
  /// Multipliers applied to S_{m,1..3} and their tilde analogs; setting one
  /// to -1 injects a sign defect.
  std::array<double, 3> s_sign{1.0, 1.0, 1.0};
  std::array<double, 3> s_tilde_sign{1.0, 1.0, 1.0};
  /// Optional external forcing added to both primitive equations.
  Forcing forcing;
  /// Adds the top-boundary flux (y/2<t>) dy h(ymax) created by truncating
  /// the tail integral at ymax.
  bool top_flux = true;
};

struct ResidualFields {
  Field r_u;
  Field r_f;
  /// Largest weighted L2 norm among the individual terms assembled into the
  /// residual; residual / term_scale is the cancellation witness.
  double term_scale = 0.0;
};

namespace detail {

inline double check_spacing(const State& a, const State& b, const State& c) {
  const double h1 = b.t - a.t, h2 = c.t - b.t;
  if (!(h1 > 0.0) || std::abs(h1 - h2) > 1e-9 * std::max(std::abs(h1), std::abs(h2))) {
    throw Error("residual: frames must be equally spaced in time");
  }
  return 0.5 * (h1 + h2);
}

inline Field dyy_with(const Field& h, DiffusionStencil st) {
  return st == DiffusionStencil::solver ? dyy_3pt(h) : dy(h, 2);
}

/// Evaluates the forcing at time t into fresh fields.
inline std::pair<Field, Field> eval_forcing(const Forcing& F, const GridPtr& g, double t) {
  Field fu(g), ff(g);
  if (F) F(t, fu, ff);
  return {std::move(fu), std::move(ff)};
}

}  // namespace detail

/// Residual of the u_m, f_m system
///   (dt + u dx + v dy - dyy) u_m - ((1+f) dx + g dy) f_m = S_{m,1} + S_{m,2} + S_{m,3}
///   (dt + u dx + v dy - dyy) f_m - ((1+f) dx + g dy) u_m = S~_{m,1} + S~_{m,2} + S~_{m,3}
/// at the middle of three equally spaced frames.
inline ResidualFields residual_umfm(const State& prev, const State& mid, const State& next, int m,
                                    const ResidualOptions& opt = {}) {
  if (m < 1 || m > 8) throw Error("residual_umfm: m must lie in [1, 8]");
  const double h = detail::check_spacing(prev, mid, next);
  const GoodUnknowns a = compute_um_fm(prev, m), c = compute_um_fm(next, m), b = compute_um_fm(mid, m);
  const GridPtr& gp = mid.u.grid_ptr();
  const WeightSpec w{1.0, mid.t};

  const SourceInputs in(mid, m);
  const SourceTriple S = source_S(in);
  const SourceTriple T = source_S_tilde(in);
  const Field& v = in.v[0];
  const Field& g = in.g[0];

  const Field dum_t = (1.0 / (2.0 * h)) * (c.u_m - a.u_m);
  const Field dfm_t = (1.0 / (2.0 * h)) * (c.f_m - a.f_m);
  const Field umx = dx(b.u_m, 1), fmx = dx(b.f_m, 1);
  const Field umy = dy(b.u_m, 1), fmy = dy(b.f_m, 1);
  const Field umyy = detail::dyy_with(b.u_m, opt.stencil);
  const Field fmyy = detail::dyy_with(b.f_m, opt.stencil);

  Field tr_u(gp), tr_f(gp), cp_u(gp), cp_f(gp);
  for (std::size_t n = 0; n < tr_u.size(); ++n) {
    tr_u[n] = mid.u[n] * umx[n] + v[n] * umy[n];
    tr_f[n] = mid.u[n] * fmx[n] + v[n] * fmy[n];
    cp_u[n] = (1.0 + mid.f[n]) * fmx[n] + g[n] * fmy[n];
    cp_f[n] = (1.0 + mid.f[n]) * umx[n] + g[n] * umy[n];
  }

  Field ru = dum_t + tr_u - umyy - cp_u;
  Field rf = dfm_t + tr_f - fmyy - cp_f;
  for (int j = 0; j < 3; ++j) {
    ru.axpy(-opt.s_sign[j], S[j]);
    rf.axpy(-opt.s_tilde_sign[j], T[j]);
  }

  if (opt.wall_flux) {
    // dx^m dy f at y = 0, one value per x column.
    const Field& wall = in.fyx[m];
    for (int i = 0; i < gp->nx; ++i) {
      const double w0 = wall(i, 0);
      for (int j = 0; j < gp->ny; ++j) {
        const double iv = in.inv(i, j);
        ru(i, j) -= in.uy(i, j) * iv * w0;
        rf(i, j) -= in.fy(i, j) * iv * w0;
      }
    }
  }

  if (opt.forcing) {
    // Forcing enters u_m through dx^m Fu, through d/dt of dy u/(1+f), and
    // through d/dt of g.
    const auto [Fu, Ff] = detail::eval_forcing(opt.forcing, gp, mid.t);
    const Field gm1 = in.g[m - 1];
    const Field gF = cumint_y(dx(Ff, m));
    const Field Fuy = dy(Fu, 1), Ffy = dy(Ff, 1);
    const Field Fum = dx(Fu, m), Ffm = dx(Ff, m);
    for (std::size_t n = 0; n < ru.size(); ++n) {
      const double iv = in.inv[n];
      ru[n] -= Fum[n] + (Fuy[n] * iv - in.uy[n] * Ff[n] * iv * iv) * gm1[n] - in.uy[n] * iv * gF[n];
      rf[n] -= Ffm[n] + (Ffy[n] * iv - in.fy[n] * Ff[n] * iv * iv) * gm1[n] - in.fy[n] * iv * gF[n];
    }
  }

  double scale = 0.0;
  for (const Field* t : std::initializer_list<const Field*>{&dum_t, &dfm_t, &tr_u, &tr_f, &umyy, &fmyy, &cp_u, &cp_f}) {
    scale = std::max(scale, weighted_l2(*t, w));
  }
  for (int j = 0; j < 3; ++j) {
    scale = std::max(scale, weighted_l2(S[j], w));
    scale = std::max(scale, weighted_l2(T[j], w));
  }
  return {std::move(ru), std::move(rf), scale};
}

/// Residual of the tail-form equations
///   (dt - dyy) U + U/<t> - dx F = -Q_u + (y/2<t>) int_y^ymax Q_u,
///   (dt - dyy) F + F/<t> - dx U = -Q_f + (y/2<t>) int_y^ymax Q_f,
/// with Q_u = (u dx + v dy) u - (f dx + g dy) f and
///      Q_f = (u dx + v dy) f - (f dx + g dy) u.
inline ResidualFields residual_UF(const State& prev, const State& mid, const State& next,
                                  const ResidualOptions& opt = {}) {
  const double h = detail::check_spacing(prev, mid, next);
  const GridPtr& gp = mid.u.grid_ptr();
  const Grid& grid = *gp;
  const WeightSpec w{1.0, mid.t};
  const double s = bracket(mid.t);

  const Field Ua = good_tail(prev.u, prev.t), Uc = good_tail(next.u, next.t), U = good_tail(mid.u, mid.t);
  const Field Fa = good_tail(prev.f, prev.t), Fc = good_tail(next.f, next.t), F = good_tail(mid.f, mid.t);

  const auto [v, g] = derive_vg(mid.u, mid.f);
  const Field ux = dx(mid.u, 1), fx = dx(mid.f, 1), uy = dy(mid.u, 1), fy = dy(mid.f, 1);
  Field Qu(gp), Qf(gp);
  for (std::size_t n = 0; n < Qu.size(); ++n) {
    Qu[n] = mid.u[n] * ux[n] + v[n] * uy[n] - mid.f[n] * fx[n] - g[n] * fy[n];
    Qf[n] = mid.u[n] * fx[n] + v[n] * fy[n] - mid.f[n] * ux[n] - g[n] * uy[n];
  }
  const auto c = uf_factor(grid, mid.t);
  Field rhs_u = tailint_y(Qu).scale_y(c) - Qu;
  Field rhs_f = tailint_y(Qf).scale_y(c) - Qf;

  const Field Ut = (1.0 / (2.0 * h)) * (Uc - Ua);
  const Field Ft = (1.0 / (2.0 * h)) * (Fc - Fa);
  const Field Uyy = detail::dyy_with(U, opt.stencil), Fyy = detail::dyy_with(F, opt.stencil);
  const Field Fx = dx(F, 1), Ux = dx(U, 1);

  Field ru = Ut - Uyy + (1.0 / s) * U - Fx - rhs_u;
  Field rf = Ft - Fyy + (1.0 / s) * F - Ux - rhs_f;

  if (opt.top_flux) {
    // int_y^ymax dyy h = dy h(ymax) - dy h(y): the first piece survives truncation.
    for (int i = 0; i < grid.nx; ++i) {
      const double tu = uy(i, grid.ny - 1), tf = fy(i, grid.ny - 1);
      for (int j = 0; j < grid.ny; ++j) {
        ru(i, j) += c[j] * tu;
        rf(i, j) += c[j] * tf;
      }
    }
  }

  if (opt.forcing) {
    const auto [Fu, Ff] = detail::eval_forcing(opt.forcing, gp, mid.t);
    ru -= good_tail(Fu, mid.t);
    rf -= good_tail(Ff, mid.t);
  }

  double scale = 0.0;
  for (const Field* t : std::initializer_list<const Field*>{&Ut, &Ft, &Uyy, &Fyy, &Fx, &Ux, &rhs_u, &rhs_f}) scale = std::max(scale, weighted_l2(*t, w));
  return {std::move(ru), std::move(rf), scale};
}

}  // namespace mhdbl

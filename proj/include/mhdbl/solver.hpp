#pragma once

// Time integration of
//   u_t + (u dx + v dy) u - dyy u = (1 + f) dx f + g dy f
//   f_t + (u dx + v dy) f - dyy f = (1 + f) dx u + g dy u
// with u = f = 0 at y = 0 and y = ymax.  Diffusion is implicit (3-point
// stencil, one tridiagonal solve per x column); everything else is explicit.

#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mhdbl/calculus.hpp"

namespace mhdbl {

struct State {
  double t = 0.0;
  Field u;
  Field f;

  static State zero(const GridPtr& g, double t = 0.0) { return {t, Field(g), Field(g)}; }
  const Grid& grid() const { return u.grid(); }
};

struct SolverConfig {
  double dt = 1e-3;
  double t_end = 100.0;
  int save_every = 100;
  double cfl_guard = 0.5;
  double f_floor_guard = 0.25;
  int order = 1;  ///< 1: IMEX Euler, 2: Crank-Nicolson + Adams-Bashforth 2
};

/// Adds a source (Fu, Ff) evaluated at time t to the right-hand side.
using Forcing = std::function<void(double t, Field& fu, Field& ff)>;

/// Explicit part: transport and coupling terms, dealiased.
inline std::pair<Field, Field> explicit_terms(const Field& u, const Field& f) {
  const auto [v, g] = derive_vg(u, f);
  const Field ux = dx(u, 1), fx = dx(f, 1);
  const Field uy = dy(u, 1), fy = dy(f, 1);
  Field nu(u.grid_ptr()), nf(u.grid_ptr());
  for (std::size_t n = 0; n < u.size(); ++n) {
    nu[n] = -(u[n] * ux[n] + v[n] * uy[n]) + (1.0 + f[n]) * fx[n] + g[n] * fy[n];
    nf[n] = -(u[n] * fx[n] + v[n] * fy[n]) + (1.0 + f[n]) * ux[n] + g[n] * uy[n];
  }
  return {dealias(nu), dealias(nf)};
}

/// Full time derivative of the continuous system, with 4th-order dyy.
inline std::pair<Field, Field> rhs(const State& s) {
  auto [du, df] = explicit_terms(s.u, s.f);
  du += dy(s.u, 2);
  df += dy(s.f, 2);
  return {std::move(du), std::move(df)};
}

namespace detail {

/// Factored (I - theta dt D2) on the interior nodes with Dirichlet ends.
/// The matrix is the same for every x column, so the LU sweep is computed once.
class DiffusionSolve {
 public:
  DiffusionSolve() = default;
  DiffusionSolve(const Grid& g, double theta_dt) : n_(g.ny) {
    lo_.assign(n_, 0.0);
    cp_.assign(n_, 0.0);
    inv_.assign(n_, 0.0);
    for (int j = 1; j + 1 < n_; ++j) {
      const double a = -theta_dt * g.d2_lower(j);
      const double b = 1.0 - theta_dt * g.d2_diag(j);
      const double c = -theta_dt * g.d2_upper(j);
      const double denom = j == 1 ? b : b - a * cp_[j - 1];
      lo_[j] = j == 1 ? 0.0 : a;
      inv_[j] = 1.0 / denom;
      cp_[j] = c * inv_[j];
    }
  }

  /// Solves in place; rhs[0] and rhs[n-1] are ignored and set to zero.
  void solve(std::span<double> r) const {
    r[0] = 0.0;
    r[n_ - 1] = 0.0;
    for (int j = 1; j + 1 < n_; ++j) r[j] = (r[j] - lo_[j] * (j == 1 ? 0.0 : r[j - 1])) * inv_[j];
    for (int j = n_ - 3; j >= 1; --j) r[j] -= cp_[j] * r[j + 1];
  }

 private:
  int n_ = 0;
  std::vector<double> lo_, cp_, inv_;
};

inline std::string fmt_time(double t) {
  std::ostringstream os;
  os.precision(10);
  os << t;
  return os.str();
}

}  // namespace detail

/// Aborts with SolverError when the state is unhealthy or dt too large.
inline void check_state(const State& s, const SolverConfig& cfg) {
  if (!s.u.all_finite() || !s.f.all_finite()) {
    throw SolverError("non-finite values at t = " + detail::fmt_time(s.t), s.t);
  }
  const double kmax = s.grid().k_max();
  const double umax = s.u.max_abs();
  const double fmax = s.f.max_abs();
  const double cfl = cfg.dt * umax * kmax + cfg.dt * (1.0 + fmax) * kmax;
  if (cfl > cfg.cfl_guard) {
    throw SolverError("CFL violation at t = " + detail::fmt_time(s.t) + ": " + std::to_string(cfl) +
                          " > " + std::to_string(cfg.cfl_guard),
                      s.t);
  }
  const double fmin = 1.0 + s.f.min();
  if (fmin < cfg.f_floor_guard) {
    throw SolverError("1+f fell to " + std::to_string(fmin) + " at t = " + detail::fmt_time(s.t), s.t);
  }
}

/// Stateful stepper.  Owns the factored implicit operator and, for the
/// second-order scheme, the previous explicit terms.  Time after n steps is
/// t0 + n * dt, never an accumulated sum, so restarts reproduce it exactly.
class Integrator {
 public:
  Integrator(const State& initial, SolverConfig cfg, Forcing forcing = {})
      : cfg_(cfg), forcing_(std::move(forcing)), t0_(initial.t) {
    if (!(cfg_.dt > 0.0)) throw Error("dt must be positive");
    if (cfg_.order != 1 && cfg_.order != 2) throw Error("scheme order must be 1 or 2");
    const Grid& g = initial.grid();
    euler_ = detail::DiffusionSolve(g, cfg_.dt);
    if (cfg_.order == 2) cn_ = detail::DiffusionSolve(g, 0.5 * cfg_.dt);
  }

  const SolverConfig& config() const { return cfg_; }
  long steps() const { return steps_; }
  double t0() const { return t0_; }
  double time_at(long n) const { return t0_ + static_cast<double>(n) * cfg_.dt; }

  bool has_history() const { return prev_.has_value(); }
  const std::pair<Field, Field>& history() const { return *prev_; }

  /// Restores counters after loading a checkpoint.
  void restore(double t0, long steps, std::optional<std::pair<Field, Field>> history) {
    t0_ = t0;
    steps_ = steps;
    prev_ = std::move(history);
  }

  /// Advances s by one step.  Boundary rows stay exactly zero.
  void step(State& s) {
    check_state(s, cfg_);
    const double dt = cfg_.dt;
    auto [nu, nf] = explicit_terms(s.u, s.f);

    Field ru = s.u, rf = s.f;
    Field fu(s.u.grid_ptr()), ff(s.u.grid_ptr());
    // Forcing sits at the new time level for Euler and at the midpoint for
    // the trapezoid scheme.
    if (forcing_) forcing_(cfg_.order == 1 ? s.t + dt : s.t + 0.5 * dt, fu, ff);
    ru.axpy(dt, fu);
    rf.axpy(dt, ff);
    if (cfg_.order == 1) {
      ru.axpy(dt, nu);
      rf.axpy(dt, nf);
      solve_columns(euler_, ru);
      solve_columns(euler_, rf);
    } else {
      ru.axpy(0.5 * dt, dyy_3pt(s.u));
      rf.axpy(0.5 * dt, dyy_3pt(s.f));
      if (!prev_) {
        ru.axpy(dt, nu);
        rf.axpy(dt, nf);
      } else {
        ru.axpy(1.5 * dt, nu).axpy(-0.5 * dt, prev_->first);
        rf.axpy(1.5 * dt, nf).axpy(-0.5 * dt, prev_->second);
      }
      solve_columns(cn_, ru);
      solve_columns(cn_, rf);
      prev_.emplace(std::move(nu), std::move(nf));
    }
    s.u = std::move(ru);
    s.f = std::move(rf);
    ++steps_;
    s.t = time_at(steps_);
  }

 private:
  static void solve_columns(const detail::DiffusionSolve& op, Field& r) {
    for (int i = 0; i < r.nx(); ++i) op.solve(r.row(i));
  }

  SolverConfig cfg_;
  Forcing forcing_;
  double t0_ = 0.0;
  long steps_ = 0;
  detail::DiffusionSolve euler_, cn_;
  std::optional<std::pair<Field, Field>> prev_;
};

/// One IMEX step from scratch (no multistep history).
inline State step(State s, const SolverConfig& cfg) {
  Integrator it(s, cfg);
  it.step(s);
  return s;
}

inline long step_count(const SolverConfig& cfg, double t_span) {
  return std::lround(t_span / cfg.dt);
}

template <class T>
struct RunResult {
  std::vector<T> frames;
  State final_state;
};

/// Integrates from `initial` to cfg.t_end.  hook(state, integrator) is
/// called at step 0, every save_every steps and at the final step; its
/// return values are collected.  Solver failures propagate as SolverError.
template <class Hook>
auto run(const State& initial, const SolverConfig& cfg, Hook&& hook, Forcing forcing = {})
    -> RunResult<std::invoke_result_t<Hook&, const State&, const Integrator&>> {
  using T = std::invoke_result_t<Hook&, const State&, const Integrator&>;
  if (cfg.save_every < 1) throw Error("save_every must be >= 1");
  RunResult<T> out{{}, initial};
  Integrator it(initial, cfg, std::move(forcing));
  const long n = step_count(cfg, cfg.t_end - initial.t);
  out.frames.push_back(hook(out.final_state, it));
  for (long k = 1; k <= n; ++k) {
    it.step(out.final_state);
    if (k % cfg.save_every == 0 || k == n) out.frames.push_back(hook(out.final_state, it));
  }
  return out;
}

}  // namespace mhdbl

#pragma once

// Subcommands behind the CLI.  Each returns a process exit status and writes
// its artifacts to the paths in the RunConfig.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mhdbl/checkpoint.hpp"
#include "mhdbl/config.hpp"
#include "mhdbl/verification.hpp"

namespace mhdbl {

using Json = nlohmann::ordered_json;

inline constexpr int kJsonSchemaVersion = 1;

namespace detail {

inline Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(); }

inline Json config_json(const RunConfig& c) {
  Json j;
  j["mode"] = mode_name(c.mode);
  j["nx"] = c.nx;
  j["ny"] = c.ny;
  j["lx"] = c.lx;
  j["ymax"] = c.ymax;
  j["stretch"] = c.stretch;
  j["dt"] = c.dt;
  j["t_end"] = c.t_end;
  j["save_every"] = c.save_every;
  j["order"] = c.order;
  j["delta"] = c.delta;
  j["lambda"] = c.lambda;
  j["lambda_list"] = c.lambda_list;
  j["epsilon"] = c.epsilon;
  j["seed"] = c.seed;
  return j;
}

inline Json header(const RunConfig& c, const char* kind) {
  Json j;
  j["format"] = std::string("mhdbl-") + kind;
  j["schema"] = kJsonSchemaVersion;
  j["config_hash"] = config_hash(c);
  j["config"] = config_json(c);
  return j;
}

inline void write_text(const std::string& path, const std::string& text) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot write " + path);
  os << text;
}

/// Slope over a window, or NaN when the window is empty or a value is not positive.
inline double try_fit(const std::vector<Sample>& s, double t0, double t1) {
  try {
    return fit_decay(s, t0, t1);
  } catch (const Error&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

inline std::string plot_script(const std::string& csv) {
  std::ostringstream os;
  os << "# Plots the frame CSV written by `mhdbl simulate`.  Needs pandas and matplotlib.\n"
     << "import sys\n"
     << "import matplotlib.pyplot as plt\n"
     << "import pandas as pd\n\n"
     << "path = sys.argv[1] if len(sys.argv) > 1 else " << Json(csv).dump() << "\n"
     << "df = pd.read_csv(path, comment='#')\n"
     << "s = 1.0 + df['t']\n"
     << "fig, ax = plt.subplots(1, 3, figsize=(15, 4))\n"
     << "ax[0].loglog(s, df['E_delta'], label='E_delta')\n"
     << "ax[0].loglog(s, df['D_delta'], label='D_delta')\n"
     << "ax[1].loglog(s, df['H80.uf'], label='H80 (u, f)')\n"
     << "for k in range(3):\n"
     << "    ax[1].loglog(s, df[f'H50.UF.k{k}'], label=f'H50 dy^{k} (U, F)')\n"
     << "ax[2].semilogy(df['t'], df['mean_drift_u'], label='mean drift u')\n"
     << "ax[2].semilogy(df['t'], df['mean_drift_f'], label='mean drift f')\n"
     << "for a in ax:\n"
     << "    a.set_xlabel('<t>')\n"
     << "    a.legend()\n"
     << "ax[2].set_xlabel('t')\n"
     << "fig.tight_layout()\n"
     << "fig.savefig(path + '.png', dpi=120)\n";
  return os.str();
}

}  // namespace detail

/// Trajectory-level reductions shared by simulate and the acceptance suite.
struct TrajectorySummary {
  double bootstrap_margin = 0.0;
  double bootstrap_ratio = 0.0;
  double slope_H80 = 0.0;         ///< fitted slope of ||(u, f)||_{H^{8,0}_mu}
  double slope_H80_scaled = 0.0;  ///< of <t>^{(1-delta)/4} ||(u, f)||_{H^{8,0}_mu}
  double slope_UF = 0.0;          ///< of ||(U, F)||_{H^{5,0}_mu}, window [5, t_end]
  double slope_UF_scaled = 0.0;   ///< of sum_k <t>^{(5-delta)/4+k/2} ||dy^k (U, F)||
  double growth_H80 = 0.0;        ///< sup over [1, t_end] of the scaled H80 norm / its t = 1 value
  double growth_UF = 0.0;
  double min_one_plus_f = 1.0;
  double max_one_plus_f = 1.0;
  double max_mean_drift = 0.0;
  /// max over frames of every norm-comparison ratio, per lambda, for the
  /// whole run and for its first and second halves
  std::vector<std::pair<double, Labeled>> observed_constants, first_half, second_half;
};

inline double scaled_H80(const DiagnosticsFrame& f, double delta) {
  return std::pow(bracket(f.t), 0.25 * (1.0 - delta)) * lookup(f.primitive_norms, "H80.uf");
}

inline double scaled_UF(const DiagnosticsFrame& f, double delta) {
  double s = 0.0;
  for (int k = 0; k <= 2; ++k) {
    s += std::pow(bracket(f.t), 0.25 * (5.0 - delta) + 0.5 * k) * lookup(f.good_norms, "H50.UF.k" + std::to_string(k));
  }
  return s;
}

inline TrajectorySummary summarize(const std::vector<DiagnosticsFrame>& frames, double delta) {
  TrajectorySummary out;
  if (frames.empty()) return out;
  std::vector<EnergyBudget> budgets;
  std::vector<Sample> h80, h80s, uf, ufs;
  for (const auto& f : frames) {
    budgets.push_back(f.budget);
    h80.push_back({f.t, lookup(f.primitive_norms, "H80.uf")});
    h80s.push_back({f.t, scaled_H80(f, delta)});
    uf.push_back({f.t, lookup(f.good_norms, "H50.UF.k0")});
    ufs.push_back({f.t, scaled_UF(f, delta)});
    out.min_one_plus_f = std::min(out.min_one_plus_f, f.f_min);
    out.max_one_plus_f = std::max(out.max_one_plus_f, f.f_max);
    out.max_mean_drift = std::max({out.max_mean_drift, f.mean_drift_u, f.mean_drift_f});
  }
  const double t0 = frames.front().t, t1 = frames.back().t;
  out.bootstrap_margin = frames.size() >= 2 ? bootstrap_check(budgets) : 0.0;
  out.bootstrap_ratio = bootstrap_ratio(budgets);
  const double w0 = std::max(1.0, t0);
  out.slope_H80 = detail::try_fit(h80, w0, t1);
  out.slope_H80_scaled = detail::try_fit(h80s, w0, t1);
  out.slope_UF = detail::try_fit(uf, std::max(5.0, t0), t1);
  out.slope_UF_scaled = detail::try_fit(ufs, w0, t1);

  // Growth relative to the first frame at or after t = 1.
  double ref_h = -1.0, ref_u = -1.0, sup_h = 0.0, sup_u = 0.0;
  for (std::size_t n = 0; n < frames.size(); ++n) {
    if (frames[n].t < 1.0 - 1e-12) continue;
    if (ref_h < 0.0) {
      ref_h = h80s[n].value;
      ref_u = ufs[n].value;
    }
    sup_h = std::max(sup_h, h80s[n].value);
    sup_u = std::max(sup_u, ufs[n].value);
  }
  out.growth_H80 = ref_h > 0.0 ? sup_h / ref_h : 0.0;
  out.growth_UF = ref_u > 0.0 ? sup_u / ref_u : 0.0;

  const double tmid = 0.5 * (t0 + t1);
  const std::size_t nl = frames.front().comparisons.size();
  for (std::size_t l = 0; l < nl; ++l) {
    const double lam = frames.front().comparisons[l].lambda;
    Labeled all = frames.front().comparisons[l].ratios, a = all, b = all;
    for (auto* v : {&all, &a, &b}) {
      for (auto& [k, x] : *v) x = 0.0;
    }
    for (const auto& f : frames) {
      const auto& r = f.comparisons[l].ratios;
      for (std::size_t i = 0; i < r.size(); ++i) {
        all[i].second = std::max(all[i].second, r[i].second);
        auto& half = f.t <= tmid ? a : b;
        half[i].second = std::max(half[i].second, r[i].second);
      }
    }
    out.observed_constants.emplace_back(lam, std::move(all));
    out.first_half.emplace_back(lam, std::move(a));
    out.second_half.emplace_back(lam, std::move(b));
  }
  return out;
}

inline Json summary_json(const TrajectorySummary& s) {
  using detail::number_or_null;
  Json j;
  j["bootstrap_margin"] = number_or_null(s.bootstrap_margin);
  j["bootstrap_ratio"] = number_or_null(s.bootstrap_ratio);
  j["decay_slopes"] = {{"H80_uf", number_or_null(s.slope_H80)},
                       {"H80_uf_scaled", number_or_null(s.slope_H80_scaled)},
                       {"H50_UF", number_or_null(s.slope_UF)},
                       {"H50_UF_scaled_sum", number_or_null(s.slope_UF_scaled)}};
  j["growth_since_t1"] = {{"H80_uf_scaled", number_or_null(s.growth_H80)},
                          {"H50_UF_scaled_sum", number_or_null(s.growth_UF)}};
  j["one_plus_f_range"] = {s.min_one_plus_f, s.max_one_plus_f};
  j["max_mean_drift"] = s.max_mean_drift;
  Json oc = Json::array();
  for (const auto& [lam, r] : s.observed_constants) {
    Json e;
    e["lambda"] = lam;
    for (const auto& [k, v] : r) e[k] = number_or_null(v);
    oc.push_back(e);
  }
  j["observed_constants"] = oc;
  return j;
}

/// Frames and outcome of one simulation.
struct SimulationOutcome {
  std::vector<DiagnosticsFrame> frames;
  State final_state;
  std::string status = "ok";  ///< ok | solver_error | error
  std::string message;
  double failure_time = std::numeric_limits<double>::quiet_NaN();
  std::string checkpoint;  ///< last checkpoint written, empty if none
  double wall_seconds = 0.0;
};

/// Runs the configured trajectory with diagnostics every save_every steps.
/// With `checkpoints`, latest.ckpt is rewritten at every frame and
/// final.ckpt is written at the end.
inline SimulationOutcome run_simulation(const RunConfig& c, bool checkpoints = true, std::ostream* log = nullptr) {
  validate(c);
  const SolverConfig scfg = c.solver();
  State state;
  std::optional<Checkpoint> ck;
  if (!c.resume.empty()) {
    ck = read_checkpoint(c.resume);
    const Grid& g = ck->state.grid();
    if (g.nx != c.nx || g.ny != c.ny || g.lx != c.lx || g.ymax != c.ymax || g.stretch != c.stretch ||
        ck->dt != c.dt || ck->order != c.order) {
      throw Error("checkpoint does not match the configured grid, dt or order");
    }
    state = ck->state;
  } else {
    state = initial_state(build_grid(c.nx, c.ny, c.lx, c.ymax, c.stretch), c.epsilon, c.seed);
  }

  Integrator it(state, scfg);
  if (ck) it.restore(ck->t0, ck->step, ck->history);
  const long total = step_count(scfg, c.t_end - it.t0());
  const auto dir = std::filesystem::path(c.checkpoint_dir);
  const std::string latest = (dir / "latest.ckpt").string(), final_ck = (dir / "final.ckpt").string();
  if (checkpoints) std::filesystem::create_directories(dir);

  SimulationOutcome out;
  auto record = [&] {
    out.frames.push_back(diagnose(state, c.delta, c.lambda, c.lambda_list));
    if (checkpoints) {
      write_checkpoint(latest, state, it);
      out.checkpoint = latest;
    }
  };
  const auto wall0 = std::chrono::steady_clock::now();
  try {
    record();
    for (long k = it.steps() + 1; k <= total; ++k) {
      it.step(state);
      if (k % c.save_every == 0 || k == total) {
        record();
        if (log && k % (100L * c.save_every) == 0) {
          *log << "t = " << state.t << "  E_delta = " << out.frames.back().budget.E_delta << "\n";
        }
      }
    }
    if (checkpoints) {
      write_checkpoint(final_ck, state, it);
      out.checkpoint = final_ck;
    }
  } catch (const SolverError& e) {
    out.status = "solver_error";
    out.message = e.what();
    out.failure_time = e.time();
  } catch (const Error& e) {
    out.status = "error";
    out.message = e.what();
    out.failure_time = state.t;
  }
  out.final_state = std::move(state);
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  return out;
}

/// simulate: frame CSV with plot script, checkpoints and summary JSON.
/// A solver abort gives exit status 2 and the failure time in the summary.
inline int cmd_simulate(const RunConfig& c, std::ostream& log = std::cout) {
  const SimulationOutcome r = run_simulation(c, true, &log);

  std::ostringstream csv;
  write_csv(csv, r.frames, config_hash(c));
  detail::write_text(c.csv, csv.str());
  detail::write_text(c.csv + ".plot.py", detail::plot_script(c.csv));

  Json j = detail::header(c, "summary");
  j["status"] = r.status;
  j["message"] = r.message;
  j["failure_time"] = detail::number_or_null(r.failure_time);
  j["resumed_from"] = c.resume.empty() ? Json() : Json(c.resume);
  j["t_start"] = r.frames.empty() ? Json() : Json(r.frames.front().t);
  j["t_final"] = r.final_state.t;
  j["frames"] = r.frames.size();
  j["csv"] = c.csv;
  j["checkpoint"] = r.checkpoint;
  j["summary"] = summary_json(summarize(r.frames, c.delta));
  detail::write_text(c.json, j.dump(2) + "\n");

  log << "simulate: " << r.status << " after " << r.frames.size() << " frames (" << r.wall_seconds << " s)";
  if (!r.message.empty()) log << ": " << r.message;
  log << "\n";
  return r.status == "ok" ? 0 : 2;
}

/// One pass/fail line of a battery.  Only acceptance-tagged checks decide the
/// exit status.
struct CheckResult {
  std::string name;
  bool acceptance = true;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

inline void to_json(Json& j, const CheckResult& r) {
  j = Json{{"name", r.name},
           {"acceptance", r.acceptance},
           {"pass", r.pass},
           {"value", detail::number_or_null(r.value)},
           {"threshold", r.threshold},
           {"detail", r.detail}};
}

/// Everything needed to judge the manufactured-solution studies.
struct MmsOutcome {
  ResidualReport space, time, exact;
  std::vector<ResidualReport> residual_dt;
};

inline MmsOutcome run_mms_studies(const ResidualOptions& base = {}) {
  MmsOutcome o;
  const auto p = mms_problem(0.5);
  o.space = mms_convergence(p, {{1e-4, 65}, {1e-4, 129}, {1e-4, 257}}, 0.1, 2);
  o.time = mms_convergence(p, {{2e-2, 1025}, {1e-2, 1025}, {5e-3, 1025}}, 0.2, 1);
  o.exact = mms_convergence(exact_in_scheme_problem(0.01), {{1e-2, 65}, {1e-2, 129}}, 1.0, 1);
  const auto q = mms_problem(0.1);
  ResidualOptions opt = base;
  opt.forcing = q.forcing;
  auto init = [&](const GridPtr& g) { return q.exact(g, 0.0); };
  const auto tr = sample_triples({{4e-3, 2049}, {2e-3, 2049}, {1e-3, 2049}}, 1, 0.04, {16, 2 * std::numbers::pi, 12.0},
                                 init, q.forcing);
  o.residual_dt = residual_reports(tr, {1, 2, 3}, true, opt);
  return o;
}

/// Order thresholds of the convergence studies.  A least-squares order is
/// compared with the nominal order minus kOrderSlack.
inline constexpr double kOrderSlack = 0.05;

inline std::vector<CheckResult> mms_checks(const MmsOutcome& o) {
  std::vector<CheckResult> out;
  auto add = [&](std::string name, double v, double thr, std::string d = {}) {
    out.push_back({std::move(name), true, v >= thr, v, thr, std::move(d)});
  };
  add("mms.space_order", o.space.fitted_order_dy, 2.0 - kOrderSlack, "IMEX2, dt = 1e-4, ny = 65, 129, 257");
  add("mms.time_order", o.time.fitted_order_dt, 1.0 - kOrderSlack, "IMEX1, ny = 1025, dt = 2e-2, 1e-2, 5e-3");
  double worst = 0.0;
  for (const auto& l : o.exact.levels) worst = std::max(worst, l.value);
  out.push_back({"mms.exact_in_scheme", true, worst < 1e-11, worst, 1e-11, "steady quadratic profile"});
  for (const auto& r : o.residual_dt) add("mms.residual_dt." + r.equation, r.fitted_order_dt, 1.0 - kOrderSlack);
  return out;
}

inline Json mms_json(const MmsOutcome& o) {
  Json j = Json::array();
  j.push_back(o.space);
  j.push_back(o.time);
  j.push_back(o.exact);
  for (const auto& r : o.residual_dt) j.push_back(r);
  return j;
}

inline void print_checks(std::ostream& log, const std::vector<CheckResult>& checks) {
  for (const auto& c : checks) {
    log << (c.pass ? "PASS " : "FAIL ") << c.name << "  value=" << c.value << "  threshold=" << c.threshold
        << (c.acceptance ? "" : "  (informational)") << "\n";
  }
}

inline int exit_status(const std::vector<CheckResult>& checks) {
  for (const auto& c : checks) {
    if (c.acceptance && !c.pass) return 1;
  }
  return 0;
}

inline int cmd_mms(const RunConfig& c, std::ostream& log = std::cout) {
  validate(c);
  const auto o = run_mms_studies();
  const auto checks = mms_checks(o);
  Json j = detail::header(c, "mms");
  j["checks"] = checks;
  j["residuals"] = mms_json(o);
  detail::write_text(c.json, j.dump(2) + "\n");
  print_checks(log, checks);
  return exit_status(checks);
}

inline ResidualOptions injected_options(int defect) {
  ResidualOptions o;
  if (defect > 0) {
    o.s_sign[defect - 1] = -1.0;
    o.s_tilde_sign[defect - 1] = -1.0;
  }
  return o;
}

/// Full battery: inequality sweeps, technical lemma, manufactured solutions,
/// residual studies on the seeded trajectory and the defect fixtures.
inline int cmd_verify(const RunConfig& c, std::ostream& log = std::cout) {
  validate(c);
  const ResidualOptions base = injected_options(c.inject_defect);
  std::vector<CheckResult> checks;
  Json ineq = Json::array(), res = Json::array();

  {
    auto g = build_grid(16, 1025, 2 * std::numbers::pi, 12.0);
    const auto sw = poincare_sweep(*g, c.seed, 100, {0.0, 0.25, 0.5, 1.0}, {0.0, 1.0, 10.0, 100.0});
    for (const auto& r : sw.worst) ineq.push_back(r);
    checks.push_back({"poincare.min_margin", true, sw.min_margin >= -1e-10 && sw.hypotheses_ok, sw.min_margin, -1e-10,
                      std::to_string(sw.evaluations) + " evaluations"});
  }
  {
    auto g = build_grid(16, 4001, 2 * std::numbers::pi, 100.0);
    for (double lam : {0.0, 0.25, 0.5, 0.75, 0.95}) {
      double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
      for (double t : {0.0, 1.0, 10.0, 100.0}) {
        const auto r = observed_sup_constant(*g, lam, t);
        ineq.push_back(r);
        lo = std::min(lo, r.ratio);
        hi = std::max(hi, r.ratio);
      }
      const double spread = hi / lo - 1.0;
      const bool tagged = lam <= 0.75;
      checks.push_back({"sup_bound.stability.lambda=" + detail::short_num(lam), tagged,
                        std::isfinite(spread) && spread <= 0.05 && hi < sup_bound_proof_constant(lam), spread, 0.05,
                        "observed C = " + detail::short_num(hi)});
    }
  }
  {
    auto g = build_grid(16, 2049, 2 * std::numbers::pi, 60.0);
    const auto fr = heat_solution_frames(*g, 0.0, 10.0, 1e-2);
    const double n0 = weighted_l2_sq_profile(*g, fr.front().phi, {1.0, 0.0});
    const double err = std::abs(n0 - 2.0 * std::sqrt(std::numbers::pi));
    checks.push_back({"technical_lemma.closed_form_norm", true, err <= 1e-5, err, 1e-5, "||phi(0)||^2 vs 2 sqrt(pi)"});
    for (bool damped : {false, true}) {
      const auto r = check_technical_lemma(*g, damped ? heat_solution_frames(*g, 0.0, 10.0, 1e-2, true) : fr, 1.0 / 25.0,
                                           damped);
      checks.push_back({damped ? "technical_lemma.damped" : "technical_lemma.heat", true,
                        r.inputs_valid && r.min_margin >= -1e-6, r.min_margin, -1e-6,
                        "max relative PDE residual " + detail::short_num(r.max_residual)});
      InequalityReport worst = r.frames.front();
      for (const auto& f : r.frames) {
        if (f.margin < worst.margin) worst = f;
      }
      ineq.push_back(worst);
    }
    auto gf = build_grid(16, 1025, 2 * std::numbers::pi, 20.0);
    const auto ff = forced_heat_frames(
        gf, [](double y) { return y * std::exp(-y * y / 4) - 0.5 * y * y * std::exp(-y * y); },
        [](double t, double y) { return std::exp(-y * y) / ((1 + t) * (1 + t)); }, 1.0, 1e-3, 10);
    const auto r = check_technical_lemma(*gf, ff, 1.0 / 25.0);
    checks.push_back({"technical_lemma.forced", true, r.inputs_valid && r.min_margin >= -1e-5, r.min_margin, -1e-5,
                      "psi = exp(-y^2) <t>^-2"});
  }
  {
    const auto o = run_mms_studies(base);
    for (auto& ch : mms_checks(o)) checks.push_back(std::move(ch));
    for (auto& r : mms_json(o)) res.push_back(std::move(r));
  }
  if (!c.quick) {
    ResidualStudyConfig rc;
    rc.seed = c.seed;
    const auto study = residual_study(rc, base);
    for (const auto& r : study.dt_study) {
      checks.push_back({"residual.dt." + r.equation, true, r.fitted_order_dt >= 1.0 - kOrderSlack, r.fitted_order_dt,
                        1.0 - kOrderSlack, "eps = 1e-3, IMEX1, ny = 2049"});
      res.push_back(r);
    }
    for (const auto& r : study.dy_study) {
      checks.push_back({"residual.dy." + r.equation, true, r.fitted_order_dy >= 1.8, r.fitted_order_dy, 1.8,
                        "eps = 1e-3, IMEX2, dt = 1e-4"});
      res.push_back(r);
    }
    for (const auto& fx : default_defect_fixtures()) {
      const auto d = run_defect_fixture(fx, rc, base);
      std::ostringstream os;
      os << "eps = " << fx.epsilon << "; orders baseline/defective:";
      for (std::size_t k = 0; k < d.baseline.size(); ++k) {
        os << " " << d.baseline[k].equation << " " << detail::short_num(d.baseline[k].fitted_order_dy) << "/"
           << detail::short_num(d.defective[k].fitted_order_dy);
        Json b = d.baseline[k], e = d.defective[k];
        b["equation"] = fx.name + ".baseline." + d.baseline[k].equation;
        e["equation"] = fx.name + ".defective." + d.defective[k].equation;
        res.push_back(b);
        res.push_back(e);
      }
      checks.push_back({"defect." + fx.name + ".detected", true, d.detected, d.detected ? 1.0 : 0.0, 1.0, os.str()});
    }
  }

  Json j = detail::header(c, "verify");
  j["inject_defect"] = c.inject_defect;
  j["quick"] = c.quick;
  j["checks"] = checks;
  j["inequalities"] = ineq;
  j["residuals"] = res;
  detail::write_text(c.json, j.dump(2) + "\n");
  print_checks(log, checks);
  return exit_status(checks);
}

/// Parsed frame CSV: header names and rows.
struct CsvTable {
  std::string comment;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const {
    for (std::size_t k = 0; k < columns.size(); ++k) {
      if (columns[k] == name) return static_cast<int>(k);
    }
    throw Error("CSV has no column " + name);
  }
};

inline CsvTable read_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path);
  CsvTable t;
  std::string line;
  std::getline(is, t.comment);
  if (t.comment.rfind("# mhdbl-diagnostics", 0) != 0) throw Error(path + " is not a diagnostics CSV");
  if (!std::getline(is, line)) return t;
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) t.columns.push_back(cell);
  while (std::getline(is, line)) {
    std::stringstream rs(line);
    std::vector<double> row;
    while (std::getline(rs, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != t.columns.size()) throw Error(path + ": ragged row");
    t.rows.push_back(std::move(row));
  }
  return t;
}

/// report: reduces an existing frame CSV to the headline numbers.
inline int cmd_report(const RunConfig& c, std::ostream& log = std::cout) {
  validate(c);
  const CsvTable t = read_csv(c.csv);
  Json j = detail::header(c, "report");
  j["source_csv"] = c.csv;
  j["source_header"] = t.comment;
  j["frames"] = t.rows.size();
  if (t.rows.size() >= 2) {
    const int ct = t.column("t"), ce = t.column("E_delta"), cd = t.column("D_delta");
    const int ch = t.column("H80.uf"), cu = t.column("H50.UF.k0");
    std::vector<EnergyBudget> b;
    std::vector<Sample> h, u;
    for (const auto& r : t.rows) {
      EnergyBudget e;
      e.t = r[ct];
      e.E_delta = r[ce];
      e.D_delta = r[cd];
      b.push_back(e);
      h.push_back({r[ct], r[ch]});
      u.push_back({r[ct], r[cu]});
    }
    const double t0 = t.rows.front()[ct], t1 = t.rows.back()[ct];
    j["t_range"] = {t0, t1};
    j["bootstrap_margin"] = bootstrap_check(b);
    j["bootstrap_ratio"] = bootstrap_ratio(b);
    j["slope_H80_uf"] = detail::number_or_null(detail::try_fit(h, std::max(1.0, t0), t1));
    j["slope_H50_UF"] = detail::number_or_null(detail::try_fit(u, std::max(5.0, t0), t1));
    log << "frames " << t.rows.size() << ", t in [" << t0 << ", " << t1 << "]\n"
        << "bootstrap ratio " << j["bootstrap_ratio"].get<double>() << "\n";
  }
  detail::write_text(c.json, j.dump(2) + "\n");
  return 0;
}

inline int dispatch(const RunConfig& c, std::ostream& log = std::cout) {
  switch (c.mode) {
    case Mode::simulate: return cmd_simulate(c, log);
    case Mode::verify: return cmd_verify(c, log);
    case Mode::mms: return cmd_mms(c, log);
    case Mode::report: return cmd_report(c, log);
  }
  return 1;
}

}  // namespace mhdbl

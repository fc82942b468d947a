#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "mhdbl/solver.hpp"
#include "mhdbl/weights.hpp"

using namespace mhdbl;

namespace {
constexpr double kPi = std::numbers::pi;

double rel_l2(const Field& a, const Field& b) {
  return weighted_l2(a - b, {0.0, 0.0}) / weighted_l2(b, {0.0, 0.0});
}

/// Plain 1D IMEX Euler for h_t = h_yy with the 3-point stencil, written
/// independently of the library's factored solver.
std::vector<double> heat_step_1d(const Grid& g, std::vector<double> h, double dt) {
  const int n = g.ny - 2;
  std::vector<double> a(n), b(n), c(n), d(n);
  for (int q = 0; q < n; ++q) {
    const int j = q + 1;
    const double hm = g.y_nodes[j] - g.y_nodes[j - 1], hp = g.y_nodes[j + 1] - g.y_nodes[j];
    a[q] = -dt * 2.0 / (hm * (hm + hp));
    c[q] = -dt * 2.0 / (hp * (hm + hp));
    b[q] = 1.0 - a[q] - c[q];
    d[q] = h[j];
  }
  for (int q = 1; q < n; ++q) {
    const double w = a[q] / b[q - 1];
    b[q] -= w * c[q - 1];
    d[q] -= w * d[q - 1];
  }
  std::vector<double> out(g.ny, 0.0);
  out[n] = d[n - 1] / b[n - 1];
  for (int q = n - 2; q >= 0; --q) out[q + 1] = (d[q] - c[q] * out[q + 2]) / b[q];
  return out;
}
}  // namespace

TEST(Rhs, ZeroState) {
  auto g = build_grid(16, 65, 2 * kPi, 8.0);
  auto [du, df] = rhs(State::zero(g));
  EXPECT_EQ(du.max_abs(), 0.0);
  EXPECT_EQ(df.max_abs(), 0.0);
}

TEST(Rhs, XIndependentIsHeat) {
  auto g = build_grid(16, 129, 2 * kPi, 12.0);
  State s = State::zero(g);
  s.u = Field::from_function(g, [](double, double y) { return y * std::exp(-y * y); });
  s.f = Field::from_function(g, [](double, double y) { return 0.3 * y * y * std::exp(-y * y); });
  auto [du, df] = rhs(s);
  EXPECT_LT((du - dy(s.u, 2)).max_abs(), 1e-14);
  EXPECT_LT((df - dy(s.f, 2)).max_abs(), 1e-14);
}

// u = eps sin(x) y e^{-y^2}, f = 0, so v = -eps cos(x)(1 - e^{-y^2})/2, g = 0:
//   du = -(u u_x + v u_y) + u_yy,  df = u_x.
TEST(Rhs, ManufacturedSingleMode) {
  const double eps = 0.1;
  for (int ny : {257, 513}) {
    auto g = build_grid(32, ny, 2 * kPi, 12.0);
    State s = State::zero(g);
    s.u = Field::from_function(g, [=](double x, double y) { return eps * std::sin(x) * y * std::exp(-y * y); });
    auto [du, df] = rhs(s);
    auto du_ex = Field::from_function(g, [=](double x, double y) {
      const double e = std::exp(-y * y);
      const double u = eps * std::sin(x) * y * e, ux = eps * std::cos(x) * y * e;
      const double uy = eps * std::sin(x) * (1 - 2 * y * y) * e;
      const double uyy = eps * std::sin(x) * (4 * y * y * y - 6 * y) * e;
      const double v = -eps * std::cos(x) * (1 - e) / 2;
      return -(u * ux + v * uy) + uyy;
    });
    auto df_ex = Field::from_function(g, [=](double x, double y) { return eps * std::cos(x) * y * std::exp(-y * y); });
    EXPECT_LT((df - df_ex).max_abs(), 1e-13);
    // v carries the O(h^2) trapezoid error.
    EXPECT_LT(rel_l2(du, du_ex), 2e-4 * std::pow(256.0 / (ny - 1), 2));
  }
}

TEST(Step, ZeroIsFixedPoint) {
  auto g = build_grid(16, 65, 2 * kPi, 8.0);
  State s = step(State::zero(g), SolverConfig{});
  EXPECT_EQ(s.u.max_abs(), 0.0);
  EXPECT_EQ(s.f.max_abs(), 0.0);
  EXPECT_NEAR(s.t, 1e-3, 1e-18);
}

TEST(Step, MatchesOneDimensionalReference) {
  auto g = build_grid(16, 129, 2 * kPi, 12.0, 0.2);
  State s = State::zero(g);
  s.u = Field::from_function(g, [](double, double y) { return y * std::exp(-y * y); });
  s.f = Field::from_function(g, [](double, double y) { return -0.2 * y * y * std::exp(-y * y); });
  SolverConfig cfg;
  cfg.dt = 1e-3;
  std::vector<double> ru(s.u.row(0).begin(), s.u.row(0).end()), rf(s.f.row(0).begin(), s.f.row(0).end());
  Integrator it(s, cfg);
  for (int n = 0; n < 50; ++n) {
    it.step(s);
    ru = heat_step_1d(*g, ru, cfg.dt);
    rf = heat_step_1d(*g, rf, cfg.dt);
    double eu = 0, nu = 0, ef = 0, nf = 0;
    for (int i = 0; i < g->nx; ++i) {
      for (int j = 0; j < g->ny; ++j) {
        eu = std::max(eu, std::abs(s.u(i, j) - ru[j]));
        ef = std::max(ef, std::abs(s.f(i, j) - rf[j]));
        nu = std::max(nu, std::abs(ru[j]));
        nf = std::max(nf, std::abs(rf[j]));
      }
    }
    ASSERT_LE(eu, 1e-10 * nu);
    ASSERT_LE(ef, 1e-10 * nf);
  }
}

// x-independent data y e^{-y^2} is the heat solution started at t = -1/4:
// u = (1/4 / (t + 1/4))^{3/2} y exp(-y^2 / (4 (t + 1/4))).  The 3-point
// stencil's O(h^2) error is 2e-4 at ny = 257, so the 1e-4 check uses 513.
TEST(Step, TracksHeatFlow) {
  auto g = build_grid(16, 513, 2 * kPi, 12.0);
  auto exact = [&](double t) {
    const double s = t + 0.25;
    return Field::from_function(g, [s](double, double y) { return std::pow(0.25 / s, 1.5) * y * std::exp(-y * y / (4 * s)); });
  };
  State s{0.0, exact(0.0), Field(g)};
  SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 1.0;
  cfg.save_every = 1000000;
  cfg.order = 2;
  auto res = run(s, cfg, [](const State& st, const Integrator&) { return st.t; });
  EXPECT_NEAR(res.final_state.t, 1.0, 1e-12);
  EXPECT_LT(rel_l2(res.final_state.u, exact(1.0)), 1e-4);
  EXPECT_EQ(res.final_state.f.max_abs(), 0.0);
}

TEST(Step, EulerTimeErrorIsFirstOrder) {
  auto g = build_grid(16, 129, 2 * kPi, 12.0);
  State s0 = State::zero(g);
  s0.u = Field::from_function(g, [](double, double y) { return y * std::exp(-y * y); });
  auto solve = [&](double dt, int order) {
    SolverConfig cfg;
    cfg.dt = dt;
    cfg.t_end = 0.2;
    cfg.save_every = 1000000;
    cfg.order = order;
    return run(s0, cfg, [](const State&, const Integrator&) { return 0; }).final_state.u;
  };
  const Field ref = solve(5e-5, 2);
  const double e1 = rel_l2(solve(4e-3, 1), ref), e2 = rel_l2(solve(2e-3, 1), ref);
  EXPECT_NEAR(std::log2(e1 / e2), 1.0, 0.15);
}

TEST(Step, SmallTwoModeSmoke) {
  auto g = build_grid(64, 129, 2 * kPi, 12.0);
  State s = State::zero(g);
  const double eps = 1e-3;
  s.u = Field::from_function(g, [=](double x, double y) { return eps * (std::sin(x) + 0.5 * std::cos(2 * x)) * y * std::exp(-y * y); });
  s.f = Field::from_function(g, [=](double x, double y) { return eps * std::cos(x) * y * y * std::exp(-y * y); });
  SolverConfig cfg;
  State n = step(s, cfg);
  EXPECT_TRUE(n.u.all_finite());
  EXPECT_TRUE(n.f.all_finite());
  for (int i = 0; i < g->nx; ++i) {
    EXPECT_EQ(n.u(i, 0), 0.0);
    EXPECT_EQ(n.u(i, g->ny - 1), 0.0);
    EXPECT_EQ(n.f(i, 0), 0.0);
    EXPECT_EQ(n.f(i, g->ny - 1), 0.0);
  }
  const double change = weighted_l2(n.u - s.u, {0, 0}) + weighted_l2(n.f - s.f, {0, 0});
  const double size = weighted_l2(s.u, {0, 0}) + weighted_l2(s.f, {0, 0});
  EXPECT_LT(change, 20 * cfg.dt * size);
  EXPECT_GT(change, 0.0);
}

TEST(Step, Guards) {
  auto g = build_grid(64, 129, 2 * kPi, 12.0);
  State s = State::zero(g);
  s.u = Field::from_function(g, [](double x, double y) { return std::sin(x) * y * std::exp(-y * y); });
  SolverConfig cfg;
  cfg.dt = 0.1;
  try {
    step(s, cfg);
    FAIL() << "expected CFL abort";
  } catch (const SolverError& e) {
    EXPECT_EQ(e.time(), 0.0);
    EXPECT_NE(std::string(e.what()).find("CFL"), std::string::npos);
  }
  State bad = State::zero(g, 2.5);
  bad.f = Field::from_function(g, [](double, double y) { return -3.0 * y * std::exp(-y * y); });
  cfg.dt = 1e-4;
  try {
    step(bad, cfg);
    FAIL() << "expected 1+f guard";
  } catch (const SolverError& e) {
    EXPECT_EQ(e.time(), 2.5);
  }
}

TEST(Run, ZeroEndTimeGivesOneFrame) {
  auto g = build_grid(16, 65, 2 * kPi, 8.0);
  SolverConfig cfg;
  cfg.t_end = 0.0;
  auto r = run(State::zero(g), cfg, [](const State& s, const Integrator&) { return s.t; });
  ASSERT_EQ(r.frames.size(), 1u);
  EXPECT_EQ(r.frames[0], 0.0);
}

TEST(Run, ZeroDataStaysZero) {
  auto g = build_grid(16, 65, 2 * kPi, 8.0);
  SolverConfig cfg;
  cfg.dt = 0.01;
  cfg.t_end = 10.0;
  cfg.save_every = 100;
  auto r = run(State::zero(g), cfg, [](const State& s, const Integrator&) { return s.u.max_abs() + s.f.max_abs(); });
  EXPECT_EQ(r.frames.size(), 11u);
  for (double v : r.frames) EXPECT_EQ(v, 0.0);
  EXPECT_NEAR(r.final_state.t, 10.0, 1e-12);
}

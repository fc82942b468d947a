#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mhdbl/verification.hpp"

using namespace mhdbl;

namespace {
constexpr double kPi = std::numbers::pi;

std::vector<double> sample(const Grid& g, double (*fn)(double)) {
  std::vector<double> h(g.ny);
  for (int j = 0; j < g.ny; ++j) h[j] = fn(g.y_nodes[j]);
  return h;
}

double gauss(double y) { return std::exp(-y * y); }
}  // namespace

TEST(Poincare, LambdaZeroIsTrivial) {
  auto g = build_grid(16, 513, 2 * kPi, 12.0);
  const auto h = sample(*g, gauss);
  const auto r = check_poincare(*g, h, 0.0, 3.0);
  EXPECT_EQ(r.lhs, 0.0);
  EXPECT_GT(r.rhs, 0.0);
  EXPECT_EQ(r.margin, 1.0);
}

TEST(Poincare, GaussianMatchesMomentOracle) {
  // sqrt(pi/7) and sqrt(pi) / (7/4)^{3/2} from tests/oracles/derive_values.py.
  auto g = build_grid(16, 2049, 2 * kPi, 12.0);
  const auto h = sample(*g, gauss);
  const auto r = check_poincare(*g, h, 1.0, 0.0);
  EXPECT_NEAR(r.lhs, 0.5 * 0.66992458569067877, 1e-6);
  EXPECT_NEAR(r.rhs, 0.76562809793220431, 1e-6);
  EXPECT_NEAR(r.margin, 1.0 - 0.5 * 0.66992458569067877 / 0.76562809793220431, 1e-6);
  EXPECT_TRUE(r.hypothesis_ok);
}

TEST(Poincare, WeightedYGaussianOracle) {
  // ||h||^2 = sqrt(pi/7), ||y h||^2 = int y^2 e^{-7y^2/4} = 0.76562809793220431 / 4.
  auto g = build_grid(16, 2049, 2 * kPi, 12.0);
  const auto h = sample(*g, gauss);
  const auto r = check_poincare_weighted_y(*g, h, 1.0, 0.0);
  const double lhs = 0.5 * std::sqrt(0.66992458569067877) + 0.25 * std::sqrt(0.76562809793220431 / 4.0);
  EXPECT_NEAR(r.lhs, lhs, 1e-6);
  EXPECT_NEAR(r.rhs, 2.0 * std::sqrt(0.76562809793220431), 1e-6);
  EXPECT_GT(r.margin, 0.0);
  EXPECT_EQ(check_poincare_weighted_y(*g, h, 0.0, 1.0).margin, 1.0);
}

TEST(Poincare, GaussianEqualityCaseIsNearlySharp) {
  // e^{-lambda y^2 / 4<t>} turns the first inequality into an equality.
  auto g = build_grid(16, 4097, 2 * kPi, 30.0);
  std::vector<double> h(g->ny);
  for (int j = 0; j < g->ny; ++j) h[j] = std::exp(-g->y_nodes[j] * g->y_nodes[j] / 8.0);
  const auto r = check_poincare(*g, h, 1.0, 1.0);
  EXPECT_NEAR(r.margin, 0.0, 1e-6);
}

TEST(Poincare, SeededSweepHasNoViolations) {
  auto g = build_grid(16, 1025, 2 * kPi, 12.0);
  const auto sw = poincare_sweep(*g, 11, 40, {0.0, 0.5, 1.0}, {0.0, 10.0});
  EXPECT_EQ(sw.evaluations, 40 * 3 * 2 * 2);
  EXPECT_EQ(sw.worst.size(), 12u);
  EXPECT_TRUE(sw.hypotheses_ok);
  EXPECT_GE(sw.min_margin, -1e-10);
  // Same seed, same worst cases.
  const auto again = poincare_sweep(*g, 11, 40, {0.0, 0.5, 1.0}, {0.0, 10.0});
  EXPECT_EQ(again.min_margin, sw.min_margin);
  EXPECT_EQ(again.worst[5].inputs, sw.worst[5].inputs);
}

TEST(Poincare, HypothesisFlagsSlowDecay) {
  auto g = build_grid(16, 257, 2 * kPi, 12.0);
  std::vector<double> h(g->ny);
  for (int j = 0; j < g->ny; ++j) h[j] = std::exp(-0.01 * g->y_nodes[j]);
  EXPECT_FALSE(check_poincare(*g, h, 1.0, 0.0).hypothesis_ok);
}

TEST(SupBound, ZeroProfile) {
  auto g = build_grid(16, 257, 2 * kPi, 12.0);
  const std::vector<double> h(g->ny, 0.0);
  const auto r = check_sup_bound(*g, h, 0.5, 1.0);
  EXPECT_EQ(r.ratio, 0.0);
  EXPECT_EQ(r.margin, 0.0);
}

TEST(SupBound, GaussianRatioMatchesQuadrature) {
  // lhs = 1 at y = 0; rhs^2 = <t>^{1/2} int 4 y^2 e^{(3/2) y^2/(8<t>) - 2 y^2}.
  auto g = build_grid(16, 4097, 2 * kPi, 12.0);
  const auto h = sample(*g, gauss);
  for (double t : {0.0, 1.0, 10.0, 100.0}) {
    const double s = 1.0 + t, c = 2.0 - 1.5 / (8.0 * s);
    const double rhs = std::pow(s, 0.25) * std::sqrt(std::sqrt(kPi) / std::pow(c, 1.5));
    const auto r = check_sup_bound(*g, h, 0.5, t);
    EXPECT_NEAR(r.lhs, 1.0, 1e-14);
    EXPECT_NEAR(r.ratio, 1.0 / rhs, 1e-6) << t;
    EXPECT_GT(r.margin, 0.0);
  }
}

TEST(SupBound, ObservedConstantIsTimeIndependentAndBelowProofConstant) {
  auto g = build_grid(16, 4001, 2 * kPi, 100.0);
  for (double lambda : {0.0, 0.5}) {
    double lo = 1e300, hi = 0.0;
    for (double t : {0.0, 1.0, 10.0, 100.0}) {
      const auto r = observed_sup_constant(*g, lambda, t);
      EXPECT_TRUE(r.hypothesis_ok);
      lo = std::min(lo, r.ratio);
      hi = std::max(hi, r.ratio);
    }
    EXPECT_GT(lo, 0.0);
    EXPECT_LE(hi / lo - 1.0, 0.05) << lambda;
    EXPECT_LT(hi, sup_bound_proof_constant(lambda)) << lambda;
  }
  EXPECT_THROW(observed_sup_constant(*g, 1.0, 0.0), Error);
}

TEST(TechnicalLemma, ClosedFormHeatSolution) {
  auto g = build_grid(16, 2049, 2 * kPi, 60.0);
  // ||phi(0)||^2 in L2_mu per unit x = 2 sqrt(pi).
  const auto fr = heat_solution_frames(*g, 0.0, 10.0, 1e-2);
  EXPECT_NEAR(weighted_l2_sq_profile(*g, fr.front().phi, {1.0, 0.0}), 2.0 * std::sqrt(kPi), 1e-8);
  const auto r = check_technical_lemma(*g, fr, 1.0 / 25.0);
  EXPECT_TRUE(r.inputs_valid);
  EXPECT_EQ(r.frames.size(), fr.size() - 2);
  EXPECT_GE(r.min_margin, -1e-6);
  // Continuous margin of the first form: (2 - delta) sqrt(pi) <t>^{-5/2}.
  const auto& mid = r.frames[499];
  const double s = 1.0 + mid.t;
  EXPECT_NEAR(mid.rhs - mid.lhs, (2.0 - 0.04) * std::sqrt(kPi) * std::pow(s, -2.5), 1e-4 * std::pow(s, -2.5));
}

TEST(TechnicalLemma, DampedVariant) {
  auto g = build_grid(16, 2049, 2 * kPi, 60.0);
  const auto fr = heat_solution_frames(*g, 0.0, 10.0, 1e-2, true);
  const auto r = check_technical_lemma(*g, fr, 1.0 / 25.0, true);
  EXPECT_TRUE(r.inputs_valid);
  EXPECT_GE(r.min_margin, -1e-6);
  // Undamped frames do not solve the damped equation.
  const auto plain = heat_solution_frames(*g, 0.0, 1.0, 1e-2);
  EXPECT_FALSE(check_technical_lemma(*g, plain, 1.0 / 25.0, true).inputs_valid);
}

TEST(TechnicalLemma, ZeroFrames) {
  auto g = build_grid(16, 129, 2 * kPi, 12.0);
  std::vector<ProfileFrame> fr;
  for (int n = 0; n < 4; ++n) fr.push_back({0.1 * n, std::vector<double>(g->ny, 0.0), std::vector<double>(g->ny, 0.0)});
  const auto r = check_technical_lemma(*g, fr, 0.04);
  EXPECT_TRUE(r.inputs_valid);
  EXPECT_EQ(r.min_margin, 0.0);
}

TEST(TechnicalLemma, ForcedOneDimensionalSolve) {
  auto g = build_grid(16, 1025, 2 * kPi, 20.0);
  // phi0'' (0) = -psi(0, 0) keeps the data compatible at the wall.
  const auto fr = forced_heat_frames(
      g, [](double y) { return y * std::exp(-y * y / 4) - 0.5 * y * y * std::exp(-y * y); },
      [](double t, double y) { return std::exp(-y * y) / ((1 + t) * (1 + t)); }, 1.0, 1e-3, 10);
  const auto r = check_technical_lemma(*g, fr, 0.04);
  EXPECT_TRUE(r.inputs_valid) << r.max_residual;
  EXPECT_GE(r.min_margin, -1e-5);
}

TEST(Mms, RefinementMustBeMonotone) {
  const auto p = mms_problem(0.1);
  EXPECT_THROW(mms_convergence(p, {{1e-3, 129}, {1e-3, 65}}, 0.01, 1), Error);
  EXPECT_THROW(mms_convergence(p, {{1e-3, 129}, {2e-3, 257}}, 0.01, 1), Error);
  EXPECT_THROW(mms_convergence(p, {{1e-3, 129}}, 0.01, 1), Error);
}

TEST(Mms, ExactInSchemeSolutionIsReproduced) {
  const auto r = mms_convergence(exact_in_scheme_problem(0.01), {{1e-2, 65}, {1e-2, 129}}, 1.0, 1);
  for (const auto& l : r.levels) EXPECT_LT(l.value, 1e-12);
  EXPECT_TRUE(std::isnan(r.fitted_order_dt));
}

TEST(Mms, ForcingVanishesForExactSolutionResidual) {
  // The forcing makes the exact fields a solution of the continuous system:
  // rhs(exact) + forcing = d/dt exact = -exact, up to discretization error.
  auto g = build_grid(32, 1025, 2 * kPi, 12.0);
  const auto p = mms_problem(0.5);
  const State s = p.exact(g, 0.3);
  auto [du, df] = rhs(s);
  Field fu(g), ff(g);
  p.forcing(0.3, fu, ff);
  du += fu;
  df += ff;
  du += s.u;
  df += s.f;
  du.zero_boundaries();
  df.zero_boundaries();
  EXPECT_LT(du.max_abs(), 1e-4);
  EXPECT_LT(df.max_abs(), 1e-4);
}

TEST(Mms, SpaceAndTimeOrders) {
  const auto p = mms_problem(0.5);
  const auto rs = mms_convergence(p, {{1e-4, 65}, {1e-4, 129}, {1e-4, 257}}, 0.1, 2);
  EXPECT_GE(rs.fitted_order_dy, 1.9);
  const auto rt = mms_convergence(p, {{2e-2, 1025}, {1e-2, 1025}, {5e-3, 1025}}, 0.2, 1);
  EXPECT_GE(rt.fitted_order_dt, 0.95);
}

TEST(Residuals, MmsTrajectoryResidualOrderInDt) {
  const auto p = mms_problem(0.1);
  StudyGrid sg{16, 2 * kPi, 12.0};
  auto init = [&](const GridPtr& g) { return p.exact(g, 0.0); };
  const auto tr = sample_triples({{4e-3, 2049}, {2e-3, 2049}, {1e-3, 2049}}, 1, 0.04, sg, init, p.forcing);
  ResidualOptions opt;
  opt.forcing = p.forcing;
  for (const auto& r : residual_reports(tr, {1, 2, 3}, true, opt)) {
    EXPECT_GE(r.fitted_order_dt, 0.9) << r.equation;
    EXPECT_TRUE(std::isnan(r.fitted_order_dy));
  }
}

TEST(Residuals, FitOrder) {
  EXPECT_NEAR(fit_order({1, 0.5, 0.25}, {3, 0.75, 0.1875}), 2.0, 1e-12);
}

TEST(Json, ReportsSerialize) {
  InequalityReport r;
  r.name = "poincare";
  r.margin = 0.5;
  nlohmann::ordered_json j = r;
  EXPECT_EQ(j["name"], "poincare");
  ResidualReport rr{"UF", {{1e-3, 0.1, 2.0}}, 1.0, std::numeric_limits<double>::quiet_NaN()};
  nlohmann::ordered_json k = rr;
  EXPECT_TRUE(k["fitted_order_dy"].is_null());
  EXPECT_EQ(k["levels"][0]["value"], 2.0);
}

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "mhdbl/energy.hpp"
#include "mhdbl/initial_data.hpp"

using namespace mhdbl;

namespace {
constexpr double kPi = std::numbers::pi;

State profile_state(const GridPtr& g, double amp = 1.0) {
  State s = State::zero(g);
  s.u = Field::from_function(g, [amp](double, double y) { return amp * initial_profile(y); });
  return s;
}

State small_random_state(const GridPtr& g, std::uint64_t seed, double eps) {
  State s = initial_state(g, eps, seed);
  s.t = 0.7;
  return s;
}

// ymax = 20 keeps the Dirichlet wall out of the weighted norms up to t = 5.
std::vector<EnergyBudget> heat_trajectory(const GridPtr& g) {
  SolverConfig cfg;
  cfg.dt = 1e-2;
  cfg.t_end = 5.0;
  cfg.save_every = 10;
  return run(profile_state(g), cfg, [](const State& s, const Integrator&) { return energy(s, kDeltaMax); }).frames;
}
}  // namespace

TEST(Energy, ZeroStateHasNoEnergy) {
  auto g = build_grid(16, 129, 2 * kPi, 12.0);
  const auto b = energy(State::zero(g), 0.04);
  EXPECT_EQ(b.E_delta, 0.0);
  EXPECT_EQ(b.D_delta, 0.0);
}

TEST(Energy, XIndependentProfileMatchesQuadratureOracle) {
  // Oracle values from tests/oracles/derive_values.py (mpmath, delta = 1/25, t = 0).
  auto g = build_grid(16, 2049, 2 * kPi, 12.0);
  const auto b = energy(profile_state(g), 1.0 / 25.0);
  EXPECT_NEAR(lookup(b.components, "E.um0"), 3.3870432845174704, 1e-6 * 3.39);
  EXPECT_NEAR(b.E_delta, 6.3583848590842251, 1e-5 * 6.36);
  EXPECT_NEAR(b.D_delta, 1.2245060076851038, 1e-5 * 1.22);
  for (int m = 1; m <= 8; ++m) {
    EXPECT_LE(lookup(b.components, "E.um" + std::to_string(m)), 1e-14 * b.E_delta) << m;
    EXPECT_LE(lookup(b.components, "D.um" + std::to_string(m)), 1e-14 * b.E_delta) << m;
  }
}

TEST(Energy, ComponentsSumToTotals) {
  auto g = build_grid(32, 257, 2 * kPi, 12.0);
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto b = energy(small_random_state(g, seed, 1e-2), 0.03);
    double e = 0.0, d = 0.0;
    for (const auto& [k, v] : b.components) {
      EXPECT_GE(v, 0.0) << k;
      (k.rfind("E.", 0) == 0 ? e : d) += v;
    }
    EXPECT_NEAR(e, b.E_delta, 1e-12 * b.E_delta);
    EXPECT_NEAR(d, b.D_delta, 1e-12 * b.D_delta);
    EXPECT_EQ(b.components.size(), 22u);
  }
}

TEST(Energy, QuadraticHomogeneityWhenFIsZero) {
  auto g = build_grid(32, 257, 2 * kPi, 12.0);
  State s = small_random_state(g, 4, 1e-2);
  s.f = Field(g);
  State s3 = s;
  s3.u *= 3.0;
  const auto a = energy(s), b = energy(s3);
  EXPECT_NEAR(b.E_delta, 9.0 * a.E_delta, 1e-12 * b.E_delta);
  EXPECT_NEAR(b.D_delta, 9.0 * a.D_delta, 1e-12 * b.D_delta);
}

TEST(Energy, DeltaOutsideRangeIsRejected) {
  auto g = build_grid(16, 65, 2 * kPi, 12.0);
  const State s = State::zero(g);
  try {
    energy(s, 0.05);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "delta exceeds 1/25");
  }
  EXPECT_THROW(energy(s, 0.0), Error);
  EXPECT_NO_THROW(energy(s, 1.0 / 25.0));
}

TEST(Energy, GuardFailurePropagates) {
  auto g = build_grid(16, 65, 2 * kPi, 12.0);
  State s = State::zero(g);
  s.f = Field::from_function(g, [](double, double y) { return -0.9 * y * std::exp(-y * y) * 2.3; });
  EXPECT_THROW(energy(s), Error);
}

TEST(Bootstrap, ZeroTrajectoryHasZeroMargin) {
  std::vector<EnergyBudget> frames(3);
  for (int n = 0; n < 3; ++n) frames[n].t = n;
  EXPECT_EQ(bootstrap_check(frames), 0.0);
  EXPECT_EQ(bootstrap_ratio(frames), 0.0);
}

TEST(Bootstrap, NeedsTwoFrames) { EXPECT_THROW(bootstrap_check({EnergyBudget{}}), Error); }

TEST(Bootstrap, HeatDecayIsPositiveAndInjectedGrowthIsNegative) {
  auto g = build_grid(16, 641, 2 * kPi, 20.0);
  auto frames = heat_trajectory(g);
  ASSERT_GE(frames.size(), 5u);
  EXPECT_GT(bootstrap_check(frames), 0.0);
  EXPECT_LE(bootstrap_ratio(frames), 1.0);
  // Doubling a late state scales its energy by four.
  frames[frames.size() - 2].E_delta *= 4.0;
  frames[frames.size() - 2].D_delta *= 4.0;
  frames.back().E_delta = 4.0 * frames.front().E_delta;
  EXPECT_LT(bootstrap_check(frames), 0.0);
}

TEST(Bootstrap, DiscreteGronwallShadowOnHeatFlow) {
  auto g = build_grid(16, 641, 2 * kPi, 20.0);
  const auto frames = heat_trajectory(g);
  for (std::size_t n = 1; n < frames.size(); ++n) {
    const double dE = frames[n].E_delta - frames[n - 1].E_delta;
    const double half_int = 0.25 * (frames[n].t - frames[n - 1].t) * (frames[n].D_delta + frames[n - 1].D_delta);
    EXPECT_LE(dE + half_int, 1e-3 * frames[n - 1].E_delta) << frames[n].t;
  }
}

TEST(FitDecay, ExactPowerLaw) {
  std::vector<Sample> s;
  for (int t = 1; t <= 100; ++t) s.push_back({double(t), std::pow(1.0 + t, -0.75)});
  EXPECT_NEAR(fit_decay(s, 1, 100), -0.75, 1e-10);
}

TEST(FitDecay, HeatNormSquaredDecaysAtThreeHalves) {
  std::vector<Sample> s;
  for (int t = 1; t <= 100; ++t) s.push_back({double(t), 2.0 * std::sqrt(kPi) * std::pow(1.0 + t, -1.5)});
  EXPECT_NEAR(fit_decay(s, 1, 100), -1.5, 1e-10);
}

TEST(FitDecay, ConstantAndInvalidSeries) {
  std::vector<Sample> s;
  for (int t = 1; t <= 10; ++t) s.push_back({double(t), 3.0});
  EXPECT_NEAR(fit_decay(s, 1, 10), 0.0, 1e-14);
  s[3].value = 0.0;
  EXPECT_THROW(fit_decay(s, 1, 10), Error);
  EXPECT_THROW(fit_decay(s, 5, 5), Error);
}

TEST(NormComparison, ZeroStateGivesZeroRatios) {
  auto g = build_grid(16, 129, 2 * kPi, 12.0);
  const auto r = norm_comparison(State::zero(g), 0.5);
  ASSERT_EQ(r.ratios.size(), 22u);
  for (const auto& [k, v] : r.ratios) EXPECT_EQ(v, 0.0) << k;
}

TEST(NormComparison, UmRatioIsOneWhenFIsZero) {
  auto g = build_grid(32, 257, 2 * kPi, 12.0);
  State s = small_random_state(g, 5, 1e-2);
  s.f = Field(g);
  const auto r = norm_comparison(s, 0.5);
  for (int m = 1; m <= 8; ++m) EXPECT_EQ(lookup(r.ratios, "um.m" + std::to_string(m)), 1.0) << m;
  for (int k = 0; k <= 2; ++k) EXPECT_GT(lookup(r.ratios, "uU.k" + std::to_string(k)), 0.0);
}

TEST(NormComparison, LambdaRange) {
  auto g = build_grid(16, 65, 2 * kPi, 12.0);
  EXPECT_THROW(norm_comparison(State::zero(g), 1.0), Error);
  EXPECT_THROW(norm_comparison(State::zero(g), -0.1), Error);
}

TEST(Diagnostics, FrameContentsAndCsv) {
  auto g = build_grid(32, 129, 2 * kPi, 12.0);
  const State s = initial_state(g, 1e-2, 7);
  const auto fr = diagnose(s, 0.04, 0.5, {0.0, 0.5});
  EXPECT_GT(fr.f_min, 0.0);
  EXPECT_LT(fr.f_max, 2.0);
  EXPECT_LE(fr.f_min, 1.0);
  EXPECT_GE(fr.f_max, 1.0);
  for (const auto& [k, v] : fr.primitive_norms) EXPECT_GE(v, 0.0) << k;
  for (const auto& [k, v] : fr.good_norms) EXPECT_GE(v, 0.0) << k;
  EXPECT_EQ(fr.comparisons.size(), 2u);
  // Zero-mean profile: the drift is trapezoid error only.
  EXPECT_LT(fr.mean_drift_u, 1e-4 * 1e-2);

  std::ostringstream os;
  write_csv(os, {fr, fr}, "abc123");
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "# mhdbl-diagnostics schema=1 config_hash=abc123");
  std::getline(is, line);
  const auto cols = std::count(line.begin(), line.end(), ',');
  EXPECT_EQ(line.rfind("t,E_delta,D_delta,E.um0", 0), 0u);
  int rows = 0;
  while (std::getline(is, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), cols);
    ++rows;
  }
  EXPECT_EQ(rows, 2);
}

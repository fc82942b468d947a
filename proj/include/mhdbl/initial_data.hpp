#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "mhdbl/solver.hpp"

namespace mhdbl {

/// y-profile of the initial data: p(y) = d/dy (y^3 e^{-y^2}) = (3y^2 - 2y^4) e^{-y^2}.
/// p(0) = p'(0) = 0 and int_0^inf p = 0, so the data satisfy both the
/// boundary and the zero-mean conditions.
inline double initial_profile(double y) {
  const double y2 = y * y;
  return (3.0 * y2 - 2.0 * y2 * y2) * std::exp(-y2);
}

/// Uniform double in [0, 1) from the top 53 bits; unlike
/// std::uniform_real_distribution this is identical across standard libraries.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct ModeSet {
  std::array<double, 4> amp{};
  std::array<double, 4> phase{};
};

/// Draws amplitudes a_k ~ U(-1, 1) / k, normalized so sum |a_k| = 1, and
/// phases uniform in [0, 2 pi).
inline ModeSet draw_modes(std::mt19937_64& rng) {
  ModeSet m;
  double total = 0.0;
  for (int k = 0; k < 4; ++k) {
    m.amp[k] = (2.0 * unit_uniform(rng) - 1.0) / (k + 1);
    m.phase[k] = 2.0 * std::numbers::pi * unit_uniform(rng);
    total += std::abs(m.amp[k]);
  }
  for (double& a : m.amp) a /= total;
  return m;
}

/// u_in = eps sum_{k=1..4} a_k sin(k x' + phi_k) p(y), with x' = 2 pi x / lx,
/// and f_in the same with an independent mode set.
inline State initial_state(const GridPtr& grid, double epsilon, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const ModeSet mu = draw_modes(rng), mf = draw_modes(rng);
  const double kx = 2.0 * std::numbers::pi / grid->lx;
  auto make = [&](const ModeSet& ms) {
    Field out = Field::from_function(grid, [&](double x, double y) {
      double s = 0.0;
      for (int k = 0; k < 4; ++k) s += ms.amp[k] * std::sin((k + 1) * kx * x + ms.phase[k]);
      return epsilon * s * initial_profile(y);
    });
    out.zero_boundaries();
    return out;
  };
  return {0.0, make(mu), make(mf)};
}

}  // namespace mhdbl

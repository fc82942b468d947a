#pragma once

// Truncated half-plane [0, lx) x [0, ymax]: periodic in x, Dirichlet at both
// y ends.  A Grid is immutable after build_grid() and is shared between all
// fields defined on it.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "mhdbl/error.hpp"

namespace mhdbl {

/// Finite-difference weights for the derivative of order `order` at `z`
/// on arbitrary distinct nodes (Fornberg's recursion).
inline std::vector<double> fd_weights(double z, std::span<const double> nodes, int order) {
  const int n = static_cast<int>(nodes.size());
  std::vector<std::vector<double>> c(n, std::vector<double>(order + 1, 0.0));
  double c1 = 1.0;
  double c4 = nodes[0] - z;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) {
          c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        }
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) {
        c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      }
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = c[i][order];
  return w;
}

/// Weights of one finite-difference row: derivative at node j is
/// sum_i w[i] * values[first + i].
struct Stencil {
  int first = 0;
  std::vector<double> w;
};

namespace detail {

/// Batched real<->complex x-transforms for an nx-by-ny row-major array
/// (x index outer).  Planned once with FFTW_ESTIMATE so results are
/// reproducible run to run; executes use the new-array interface and are
/// safe to call concurrently.
class FftPlans {
 public:
  FftPlans(int nx, int ny) : nx_(nx), ny_(ny), nk_(nx / 2 + 1) {
    std::vector<double> real(static_cast<std::size_t>(nx) * ny);
    std::vector<std::complex<double>> spec(static_cast<std::size_t>(nk_) * ny);
    auto* c = reinterpret_cast<fftw_complex*>(spec.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward_ = fftw_plan_many_dft_r2c(1, &nx_, ny, real.data(), nullptr, ny, 1, c, nullptr, ny,
                                      1, flags);
    backward_ = fftw_plan_many_dft_c2r(1, &nx_, ny, c, nullptr, ny, 1, real.data(), nullptr, ny,
                                       1, flags);
    if (forward_ == nullptr || backward_ == nullptr) throw Error("FFTW planning failed");
  }
  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;
  ~FftPlans() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }

  int nk() const { return nk_; }

  void forward(std::span<const double> in, std::span<std::complex<double>> out) const {
    // r2c does not modify its input.
    fftw_execute_dft_r2c(forward_, const_cast<double*>(in.data()),
                         reinterpret_cast<fftw_complex*>(out.data()));
  }

  /// Unnormalized inverse; destroys `in`.
  void backward(std::span<std::complex<double>> in, std::span<double> out) const {
    fftw_execute_dft_c2r(backward_, reinterpret_cast<fftw_complex*>(in.data()), out.data());
  }

 private:
  int nx_, ny_, nk_;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

}  // namespace detail

class Grid {
 public:
  int nx = 0;
  int ny = 0;
  double lx = 0.0;
  double ymax = 0.0;
  double stretch = 0.0;
  std::vector<double> x_nodes;
  std::vector<double> y_nodes;
  std::vector<double> y_quad;  ///< trapezoid weights for int_0^ymax dy

  std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
  double dx() const { return lx / nx; }
  double wavenumber(int k) const { return 2.0 * std::numbers::pi * k / lx; }
  /// Largest resolved wavenumber (Nyquist).
  double k_max() const { return wavenumber(nx / 2); }

  /// 4th-order first-derivative stencil at node j (5 nodes).
  const Stencil& d1(int j) const { return d1_[j]; }
  /// 4th-order second-derivative stencil at node j (5 nodes centred,
  /// 6 one-sided nodes on the two rows next to each boundary).
  const Stencil& d2(int j) const { return d2_[j]; }

  /// 3-point second-derivative coefficients (lower, diagonal, upper) at an
  /// interior node; used by the implicit diffusion solve.
  double d2_lower(int j) const { return d2c_lo_[j]; }
  double d2_diag(int j) const { return d2c_di_[j]; }
  double d2_upper(int j) const { return d2c_up_[j]; }

  const detail::FftPlans& fft() const { return *fft_; }

 private:
  friend std::shared_ptr<const Grid> build_grid(int, int, double, double, double);

  std::vector<Stencil> d1_, d2_;
  std::vector<double> d2c_lo_, d2c_di_, d2c_up_;
  std::shared_ptr<detail::FftPlans> fft_;
};

using GridPtr = std::shared_ptr<const Grid>;

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

/// Builds the tensor grid.  With stretch > 0 the y nodes follow
/// y(s) = ymax * s * (1 - stretch + stretch * s), s uniform in [0, 1], which
/// clusters nodes near the wall and is monotone for stretch < 1.
inline GridPtr build_grid(int nx, int ny, double lx, double ymax, double stretch = 0.0) {
  if (!is_power_of_two(nx) || nx < 16) {
    throw Error("nx must be a power of two >= 16 (got " + std::to_string(nx) + ")");
  }
  if (ny < 65) throw Error("ny must be >= 65 (got " + std::to_string(ny) + ")");
  if (!(lx > 0.0) || !(ymax > 0.0)) throw Error("lx and ymax must be positive");
  if (!(stretch >= 0.0 && stretch < 1.0)) throw Error("stretch must lie in [0, 1)");

  auto g = std::make_shared<Grid>();
  g->nx = nx;
  g->ny = ny;
  g->lx = lx;
  g->ymax = ymax;
  g->stretch = stretch;

  g->x_nodes.resize(nx);
  for (int i = 0; i < nx; ++i) g->x_nodes[i] = lx * i / nx;

  g->y_nodes.resize(ny);
  for (int j = 0; j < ny; ++j) {
    const double s = static_cast<double>(j) / (ny - 1);
    g->y_nodes[j] = stretch == 0.0 ? ymax * j / (ny - 1) : ymax * s * (1.0 - stretch + stretch * s);
  }
  g->y_nodes.front() = 0.0;
  g->y_nodes.back() = ymax;

  const auto& y = g->y_nodes;
  g->y_quad.assign(ny, 0.0);
  for (int j = 0; j + 1 < ny; ++j) {
    const double h = y[j + 1] - y[j];
    g->y_quad[j] += 0.5 * h;
    g->y_quad[j + 1] += 0.5 * h;
  }

  const std::span<const double> ys(y);
  g->d1_.resize(ny);
  g->d2_.resize(ny);
  for (int j = 0; j < ny; ++j) {
    const int f1 = std::clamp(j - 2, 0, ny - 5);
    g->d1_[j] = {f1, fd_weights(y[j], ys.subspan(f1, 5), 1)};
    if (j >= 2 && j <= ny - 3) {
      g->d2_[j] = {j - 2, fd_weights(y[j], ys.subspan(j - 2, 5), 2)};
    } else {
      const int f2 = j < 2 ? 0 : ny - 6;
      g->d2_[j] = {f2, fd_weights(y[j], ys.subspan(f2, 6), 2)};
    }
  }

  g->d2c_lo_.assign(ny, 0.0);
  g->d2c_di_.assign(ny, 0.0);
  g->d2c_up_.assign(ny, 0.0);
  for (int j = 1; j + 1 < ny; ++j) {
    const double hm = y[j] - y[j - 1];
    const double hp = y[j + 1] - y[j];
    g->d2c_lo_[j] = 2.0 / (hm * (hm + hp));
    g->d2c_up_[j] = 2.0 / (hp * (hm + hp));
    g->d2c_di_[j] = -(g->d2c_lo_[j] + g->d2c_up_[j]);
  }

  g->fft_ = std::make_shared<detail::FftPlans>(nx, ny);
  return g;
}

/// Composite trapezoid quadrature of y samples over [0, ymax].
inline double quad_y(const Grid& grid, std::span<const double> samples) {
  if (static_cast<int>(samples.size()) != grid.ny) {
    throw Error("quad_y: expected " + std::to_string(grid.ny) + " samples, got " +
                std::to_string(samples.size()));
  }
  double s = 0.0;
  for (int j = 0; j < grid.ny; ++j) s += grid.y_quad[j] * samples[j];
  return s;
}

}  // namespace mhdbl

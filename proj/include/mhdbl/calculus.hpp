#pragma once

// x-derivatives are spectral, y-derivatives are finite differences and the
// y-integrals use the trapezoid rule on the grid nodes.

#include <complex>
#include <span>
#include <utility>
#include <vector>

#include "mhdbl/field.hpp"

namespace mhdbl {

/// Half-spectrum of a field in x, normalized so that mode k of
/// a*cos(kx) has coefficient a/2.  Layout: mode k, column j at k * ny + j.
class Spectrum {
 public:
  explicit Spectrum(const Field& f)
      : grid_(f.grid_ptr()), c_(static_cast<std::size_t>(grid_->fft().nk()) * grid_->ny) {
    grid_->fft().forward(f.values(), c_);
    const double s = 1.0 / grid_->nx;
    for (auto& z : c_) z *= s;
  }

  int nk() const { return grid_->fft().nk(); }
  std::complex<double>& at(int k, int j) { return c_[static_cast<std::size_t>(k) * grid_->ny + j]; }
  std::complex<double> at(int k, int j) const { return c_[static_cast<std::size_t>(k) * grid_->ny + j]; }

  /// Multiplies mode k by (i k')^m with k' the physical wavenumber.  The
  /// Nyquist mode is zeroed for odd m since its derivative is not real.
  Spectrum& differentiate(int m) {
    if (m == 0) return *this;
    const int nk_ = nk();
    for (int k = 0; k < nk_; ++k) {
      std::complex<double> factor = std::pow(std::complex<double>(0.0, grid_->wavenumber(k)), m);
      if (k == grid_->nx / 2 && m % 2 == 1) factor = 0.0;
      for (int j = 0; j < grid_->ny; ++j) at(k, j) *= factor;
    }
    return *this;
  }

  /// 2/3 rule: keeps |k| <= nx/3.
  Spectrum& dealias() {
    const int cut = grid_->nx / 3;
    for (int k = cut + 1; k < nk(); ++k) {
      for (int j = 0; j < grid_->ny; ++j) at(k, j) = 0.0;
    }
    return *this;
  }

  Field to_field() const {
    std::vector<std::complex<double>> work(c_);
    Field out(grid_);
    grid_->fft().backward(work, out.values());
    return out;
  }

 private:
  GridPtr grid_;
  std::vector<std::complex<double>> c_;
};

/// m-th x-derivative, spectrally.
inline Field dx(const Field& f, int m) {
  if (m < 0 || m > 10) throw Error("dx: order must lie in [0, 10]");
  if (m == 0) return f;
  return Spectrum(f).differentiate(m).to_field();
}

/// Removes modes above nx/3.
inline Field dealias(const Field& f) { return Spectrum(f).dealias().to_field(); }

/// Dealiased pointwise product.
inline Field product(const Field& a, const Field& b) { return dealias(a * b); }

/// 4th-order finite-difference y-derivative (k = 1 or 2) of one profile.
inline std::vector<double> dy_profile(const Grid& g, std::span<const double> h, int k) {
  if (k != 1 && k != 2) throw Error("dy: order must be 1 or 2");
  std::vector<double> out(g.ny);
  for (int j = 0; j < g.ny; ++j) {
    const Stencil& st = k == 1 ? g.d1(j) : g.d2(j);
    double s = 0.0;
    for (std::size_t q = 0; q < st.w.size(); ++q) s += st.w[q] * h[st.first + q];
    out[j] = s;
  }
  return out;
}

inline Field dy(const Field& f, int k) {
  if (k != 1 && k != 2) throw Error("dy: order must be 1 or 2");
  const Grid& g = f.grid();
  Field out(f.grid_ptr());
  for (int i = 0; i < g.nx; ++i) {
    const auto src = f.row(i);
    auto dst = out.row(i);
    for (int j = 0; j < g.ny; ++j) {
      const Stencil& st = k == 1 ? g.d1(j) : g.d2(j);
      double s = 0.0;
      for (std::size_t q = 0; q < st.w.size(); ++q) s += st.w[q] * src[st.first + q];
      dst[j] = s;
    }
  }
  return out;
}

/// 3-point second y-derivative, the operator the implicit solve inverts.
/// Boundary rows are set to zero.
inline Field dyy_3pt(const Field& f) {
  const Grid& g = f.grid();
  Field out(f.grid_ptr());
  for (int i = 0; i < g.nx; ++i) {
    const auto s = f.row(i);
    auto d = out.row(i);
    for (int j = 1; j + 1 < g.ny; ++j) {
      d[j] = g.d2_lower(j) * s[j - 1] + g.d2_diag(j) * s[j] + g.d2_upper(j) * s[j + 1];
    }
  }
  return out;
}

inline std::vector<double> cumint_profile(const Grid& g, std::span<const double> h) {
  std::vector<double> out(g.ny, 0.0);
  for (int j = 1; j < g.ny; ++j) {
    out[j] = out[j - 1] + 0.5 * (g.y_nodes[j] - g.y_nodes[j - 1]) * (h[j] + h[j - 1]);
  }
  return out;
}

/// int_y^ymax h, computed as total - cumulative so that the two always sum
/// to the same constant.
inline std::vector<double> tailint_profile(const Grid& g, std::span<const double> h) {
  auto c = cumint_profile(g, h);
  const double total = c.back();
  for (double& a : c) a = total - a;
  c.back() = 0.0;
  return c;
}

/// F(x, y) = int_0^y field, trapezoid.
inline Field cumint_y(const Field& f) {
  Field out(f.grid_ptr());
  const Grid& g = f.grid();
  for (int i = 0; i < g.nx; ++i) {
    const auto s = f.row(i);
    auto d = out.row(i);
    d[0] = 0.0;
    for (int j = 1; j < g.ny; ++j) d[j] = d[j - 1] + 0.5 * (g.y_nodes[j] - g.y_nodes[j - 1]) * (s[j] + s[j - 1]);
  }
  return out;
}

/// T(x, y) = int_y^ymax field.
inline Field tailint_y(const Field& f) {
  Field out = cumint_y(f);
  const Grid& g = f.grid();
  for (int i = 0; i < g.nx; ++i) {
    auto d = out.row(i);
    const double total = d[g.ny - 1];
    for (int j = 0; j < g.ny; ++j) d[j] = total - d[j];
    d[g.ny - 1] = 0.0;
  }
  return out;
}

/// quad_y applied to every x column.
inline std::vector<double> column_means(const Field& f) {
  std::vector<double> out(f.nx());
  for (int i = 0; i < f.nx(); ++i) out[i] = quad_y(f.grid(), f.row(i));
  return out;
}

/// v = -int_0^y dx u, g = -int_0^y dx f.
inline std::pair<Field, Field> derive_vg(const Field& u, const Field& f) {
  return {-cumint_y(dx(u, 1)), -cumint_y(dx(f, 1))};
}

}  // namespace mhdbl

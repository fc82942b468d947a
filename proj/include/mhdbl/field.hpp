#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "mhdbl/grid.hpp"

namespace mhdbl {

/// Nodal values on a Grid, stored row-major with the x index outer:
/// value(i, j) lives at i * ny + j.
class Field {
 public:
  Field() = default;
  explicit Field(GridPtr grid, double fill = 0.0)
      : grid_(std::move(grid)), v_(grid_->size(), fill) {}
  Field(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), v_(std::move(values)) {
    if (v_.size() != grid_->size()) throw Error("Field: value count does not match grid");
  }

  /// Samples fn(x, y) at every node.
  template <class Fn>
  static Field from_function(GridPtr grid, Fn&& fn) {
    Field out(grid);
    for (int i = 0; i < grid->nx; ++i) {
      for (int j = 0; j < grid->ny; ++j) out(i, j) = fn(grid->x_nodes[i], grid->y_nodes[j]);
    }
    return out;
  }

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  bool empty() const { return !grid_; }
  int nx() const { return grid_->nx; }
  int ny() const { return grid_->ny; }
  std::size_t size() const { return v_.size(); }

  double& operator()(int i, int j) { return v_[static_cast<std::size_t>(i) * grid_->ny + j]; }
  double operator()(int i, int j) const { return v_[static_cast<std::size_t>(i) * grid_->ny + j]; }
  double& operator[](std::size_t n) { return v_[n]; }
  double operator[](std::size_t n) const { return v_[n]; }

  std::span<double> row(int i) { return {v_.data() + static_cast<std::size_t>(i) * grid_->ny, static_cast<std::size_t>(grid_->ny)}; }
  std::span<const double> row(int i) const { return {v_.data() + static_cast<std::size_t>(i) * grid_->ny, static_cast<std::size_t>(grid_->ny)}; }

  std::vector<double>& values() { return v_; }
  const std::vector<double>& values() const { return v_; }

  double max_abs() const {
    double m = 0.0;
    for (double a : v_) m = std::max(m, std::abs(a));
    return m;
  }
  double min() const { return *std::min_element(v_.begin(), v_.end()); }
  double max() const { return *std::max_element(v_.begin(), v_.end()); }
  bool all_finite() const {
    return std::all_of(v_.begin(), v_.end(), [](double a) { return std::isfinite(a); });
  }

  /// Zeroes the y = 0 and y = ymax rows of every x column.
  void zero_boundaries() {
    for (int i = 0; i < nx(); ++i) {
      (*this)(i, 0) = 0.0;
      (*this)(i, ny() - 1) = 0.0;
    }
  }

  Field& operator+=(const Field& o) { check(o); for (std::size_t n = 0; n < v_.size(); ++n) v_[n] += o.v_[n]; return *this; }
  Field& operator-=(const Field& o) { check(o); for (std::size_t n = 0; n < v_.size(); ++n) v_[n] -= o.v_[n]; return *this; }
  Field& operator*=(const Field& o) { check(o); for (std::size_t n = 0; n < v_.size(); ++n) v_[n] *= o.v_[n]; return *this; }
  Field& operator/=(const Field& o) { check(o); for (std::size_t n = 0; n < v_.size(); ++n) v_[n] /= o.v_[n]; return *this; }
  Field& operator*=(double a) { for (double& x : v_) x *= a; return *this; }
  Field& operator+=(double a) { for (double& x : v_) x += a; return *this; }

  /// this += a * o
  Field& axpy(double a, const Field& o) {
    check(o);
    for (std::size_t n = 0; n < v_.size(); ++n) v_[n] += a * o.v_[n];
    return *this;
  }

  /// Multiplies column j (all x) by w[j].
  Field& scale_y(std::span<const double> w) {
    for (int i = 0; i < nx(); ++i) {
      auto r = row(i);
      for (int j = 0; j < ny(); ++j) r[j] *= w[j];
    }
    return *this;
  }

  void check(const Field& o) const {
    if (o.grid_ != grid_ && (o.grid_->nx != grid_->nx || o.grid_->ny != grid_->ny)) {
      throw Error("Field shape mismatch");
    }
  }

 private:
  GridPtr grid_;
  std::vector<double> v_;
};

inline Field operator+(Field a, const Field& b) { return a += b; }
inline Field operator-(Field a, const Field& b) { return a -= b; }
inline Field operator*(Field a, const Field& b) { return a *= b; }
inline Field operator/(Field a, const Field& b) { return a /= b; }
inline Field operator*(double s, Field a) { return a *= s; }
inline Field operator*(Field a, double s) { return a *= s; }
inline Field operator-(Field a) { return a *= -1.0; }

}  // namespace mhdbl

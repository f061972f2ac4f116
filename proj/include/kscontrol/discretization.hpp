#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kscontrol/errors.hpp"

namespace kscontrol {

/// Uniform partition of [-L, L] into J cells K_j = [x_{j-1}, x_j].
class SpatialGrid {
 public:
  SpatialGrid() = default;
  SpatialGrid(double half_length, std::size_t cells)
      : half_length_(half_length), cells_(cells), dx_(2.0 * half_length / static_cast<double>(cells)) {
    if (!(std::isfinite(half_length) && half_length > 0.0))
      throw ValidationError(ErrorCode::invalid_grid, "domain half-length L must be positive");
    if (cells < 2) throw ValidationError(ErrorCode::invalid_grid, "cell count J must be at least 2");
  }

  double half_length() const { return half_length_; }
  std::size_t cells() const { return cells_; }
  double dx() const { return dx_; }
  double length() const { return 2.0 * half_length_; }

  /// Center of cell j (zero-based).
  double center(std::size_t j) const {
    return -half_length_ + dx_ * (static_cast<double>(j) + 0.5);
  }
  std::vector<double> centers() const {
    std::vector<double> out(cells_);
    for (std::size_t j = 0; j < cells_; ++j) out[j] = center(j);
    return out;
  }

 private:
  double half_length_ = 1.0;
  std::size_t cells_ = 2;
  double dx_ = 1.0;
};

/// Uniform partition of [0, T] into N steps I_n = [t_{n-1}, t_n].
class TimeGrid {
 public:
  TimeGrid() = default;
  TimeGrid(double horizon, std::size_t steps)
      : horizon_(horizon), steps_(steps), dt_(horizon / static_cast<double>(steps)) {
    if (!(std::isfinite(horizon) && horizon > 0.0))
      throw ValidationError(ErrorCode::invalid_grid, "time horizon T must be positive");
    if (steps < 1) throw ValidationError(ErrorCode::invalid_grid, "step count N must be at least 1");
  }

  double horizon() const { return horizon_; }
  std::size_t steps() const { return steps_; }
  double dt() const { return dt_; }
  /// Time level t_n, n = 0..N.
  double level(std::size_t n) const { return dt_ * static_cast<double>(n); }

 private:
  double horizon_ = 1.0;
  std::size_t steps_ = 1;
  double dt_ = 1.0;
};

/// Validates the four grid parameters and builds both grids.
inline std::pair<SpatialGrid, TimeGrid> build_grids(double half_length, long long cells, double horizon,
                                                   long long steps) {
  if (cells < 2) throw ValidationError(ErrorCode::invalid_grid, "cell count J must be at least 2");
  if (steps < 1) throw ValidationError(ErrorCode::invalid_grid, "step count N must be at least 1");
  return {SpatialGrid(half_length, static_cast<std::size_t>(cells)),
          TimeGrid(horizon, static_cast<std::size_t>(steps))};
}

/// One value per cell.
using CellField = std::vector<double>;

/// Row-major table of piecewise-constant values, one row per time level.
///
/// Controls and targets carry N rows (row n-1 holds step n). State-like
/// trajectories carry N+1 rows and their meaning of row 0 is documented on
/// the owning type.
class SpaceTimeField {
 public:
  SpaceTimeField() = default;
  SpaceTimeField(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool same_shape(const SpaceTimeField& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  bool all_finite() const {
    for (double x : data_)
      if (!std::isfinite(x)) return false;
    return true;
  }

  SpaceTimeField& operator+=(const SpaceTimeField& o) {
    require_same_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  SpaceTimeField& operator*=(double s) {
    for (double& x : data_) x *= s;
    return *this;
  }
  /// this += s * o
  void axpy(double s, const SpaceTimeField& o) {
    require_same_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * o.data_[i];
  }

  bool operator==(const SpaceTimeField&) const = default;

 private:
  void require_same_shape(const SpaceTimeField& o) const {
    if (!same_shape(o)) throw ValidationError(ErrorCode::shape_mismatch, "space-time field shape mismatch");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class Side : std::size_t { left = 0, right = 1 };

/// Per-step values at the two endpoints; column 0 is x = -L (cell 1),
/// column 1 is x = L (cell J).
class BoundarySignal {
 public:
  BoundarySignal() = default;
  explicit BoundarySignal(std::size_t steps, double fill = 0.0) : values_(steps, 2, fill) {}

  std::size_t steps() const { return values_.rows(); }
  double& at(std::size_t row, Side s) { return values_(row, static_cast<std::size_t>(s)); }
  double at(std::size_t row, Side s) const { return values_(row, static_cast<std::size_t>(s)); }

  SpaceTimeField& table() { return values_; }
  const SpaceTimeField& table() const { return values_; }

  bool operator==(const BoundarySignal&) const = default;

 private:
  SpaceTimeField values_;
};

struct RegionMask {
  std::vector<char> member;  // 1 for cells in the region
  double measure = 0.0;

  static RegionMask none(const SpatialGrid& sg) { return {std::vector<char>(sg.cells(), 0), 0.0}; }
  static RegionMask whole(const SpatialGrid& sg) {
    return {std::vector<char>(sg.cells(), 1), sg.dx() * static_cast<double>(sg.cells())};
  }

  bool empty() const { return count() == 0; }
  std::size_t count() const {
    std::size_t c = 0;
    for (char b : member) c += b ? 1 : 0;
    return c;
  }
  double indicator(std::size_t j) const { return member[j] ? 1.0 : 0.0; }
};

struct BoundaryMask {
  bool left = false;
  bool right = false;

  int count() const { return (left ? 1 : 0) + (right ? 1 : 0); }
  bool contains(Side s) const { return s == Side::left ? left : right; }
};

/// Midpoint-rule cell averages of a profile.
inline CellField cell_averages(const std::function<double(double)>& sampler, const SpatialGrid& sg) {
  CellField out(sg.cells());
  for (std::size_t j = 0; j < sg.cells(); ++j) {
    const double x = sg.center(j);
    out[j] = sampler(x);
    if (!std::isfinite(out[j]))
      throw ValidationError(ErrorCode::non_finite_value,
                            "profile is not finite in cell " + std::to_string(j + 1) + " (x = " +
                                std::to_string(x) + ")");
  }
  return out;
}

/// Cells whose centers lie in the closed interval [a, b].
inline RegionMask interval_to_mask(double a, double b, const SpatialGrid& sg) {
  if (!(a < b))
    throw ValidationError(ErrorCode::empty_region, "region interval needs a < b");
  RegionMask m = RegionMask::none(sg);
  for (std::size_t j = 0; j < sg.cells(); ++j) {
    const double c = sg.center(j);
    m.member[j] = (c >= a && c <= b);
  }
  const std::size_t n = m.count();
  if (n == 0)
    throw ValidationError(ErrorCode::empty_region,
                          "region [" + std::to_string(a) + ", " + std::to_string(b) +
                              "] contains no cell center");
  m.measure = sg.dx() * static_cast<double>(n);
  return m;
}

/// Discrete L2(0,T; L2(-L,L)) product: sum dt dx a_j^n b_j^n.
inline double inner_product(const SpaceTimeField& a, const SpaceTimeField& b, const TimeGrid& tg,
                            const SpatialGrid& sg) {
  if (!a.same_shape(b))
    throw ValidationError(ErrorCode::shape_mismatch, "inner_product: shape mismatch");
  const auto av = a.values();
  const auto bv = b.values();
  double s = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) s += av[i] * bv[i];
  return tg.dt() * sg.dx() * s;
}

/// Discrete L2(0,T) product summed over the masked endpoints.
inline double boundary_inner_product(const BoundarySignal& a, const BoundarySignal& b, const TimeGrid& tg,
                                     const BoundaryMask& bm) {
  if (a.steps() != b.steps())
    throw ValidationError(ErrorCode::shape_mismatch, "boundary_inner_product: shape mismatch");
  double s = 0.0;
  for (std::size_t r = 0; r < a.steps(); ++r) {
    if (bm.left) s += a.at(r, Side::left) * b.at(r, Side::left);
    if (bm.right) s += a.at(r, Side::right) * b.at(r, Side::right);
  }
  return tg.dt() * s;
}

inline double positive_part(double a) { return a > 0.0 ? a : 0.0; }
inline double negative_part(double a) { return a < 0.0 ? a : 0.0; }
/// Heaviside with H(0) = 1/2.
inline double heaviside(double a) { return a > 0.0 ? 1.0 : (a < 0.0 ? 0.0 : 0.5); }

}  // namespace kscontrol

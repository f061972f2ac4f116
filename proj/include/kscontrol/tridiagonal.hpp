#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "kscontrol/errors.hpp"

namespace kscontrol {

/// Tridiagonal system; lower[i] is entry (i+1, i), upper[i] is entry (i, i+1).
struct TridiagonalSystem {
  std::vector<double> lower;
  std::vector<double> diag;
  std::vector<double> upper;
  std::vector<double> rhs;

  explicit TridiagonalSystem(std::size_t n = 0) : lower(n ? n - 1 : 0), diag(n), upper(n ? n - 1 : 0), rhs(n) {}

  std::size_t size() const { return diag.size(); }

  /// Transposed matrix, same right-hand side.
  TridiagonalSystem transposed() const {
    TridiagonalSystem t = *this;
    t.lower = upper;
    t.upper = lower;
    return t;
  }
};

/// Thomas elimination without pivoting, writing into `x`. `scratch` must hold
/// n values. Every pivot must stay positive; the M-matrices assembled by the
/// solvers guarantee it, so a failure means a broken assembly.
inline void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                              std::span<const double> upper, std::span<const double> rhs, std::span<double> x,
                              std::span<double> scratch) {
  const std::size_t n = diag.size();
  if (n == 0) return;
  if (rhs.size() != n || x.size() != n || scratch.size() < n || lower.size() + 1 != n || upper.size() + 1 != n)
    throw ValidationError(ErrorCode::shape_mismatch, "tridiagonal system has inconsistent sizes");

  double pivot = diag[0];
  if (!(pivot > 0.0) || !std::isfinite(pivot)) throw SolverError("tridiagonal dominance breakdown at row 1");
  double inv = 1.0 / pivot;
  x[0] = rhs[0] * inv;
  for (std::size_t i = 1; i < n; ++i) {
    scratch[i - 1] = upper[i - 1] * inv;
    pivot = diag[i] - lower[i - 1] * scratch[i - 1];
    if (!(pivot > 0.0) || !std::isfinite(pivot))
      throw SolverError("tridiagonal dominance breakdown at row " + std::to_string(i + 1));
    inv = 1.0 / pivot;
    x[i] = (rhs[i] - lower[i - 1] * x[i - 1]) * inv;
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= scratch[i] * x[i + 1];
}

inline std::vector<double> solve_tridiagonal(const TridiagonalSystem& sys) {
  std::vector<double> x(sys.size()), scratch(sys.size());
  solve_tridiagonal(sys.lower, sys.diag, sys.upper, sys.rhs, x, scratch);
  return x;
}

/// y = A x for the tridiagonal matrix of `sys`.
inline std::vector<double> multiply(const TridiagonalSystem& sys, std::span<const double> x) {
  const std::size_t n = sys.size();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = sys.diag[i] * x[i];
    if (i > 0) s += sys.lower[i - 1] * x[i - 1];
    if (i + 1 < n) s += sys.upper[i] * x[i + 1];
    y[i] = s;
  }
  return y;
}

}  // namespace kscontrol

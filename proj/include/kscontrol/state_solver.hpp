#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "kscontrol/discretization.hpp"
#include "kscontrol/problem.hpp"
#include "kscontrol/tridiagonal.hpp"

namespace kscontrol {

/// Cell density u and chemical v on levels n = 0..N (row n is level n).
struct StateTrajectory {
  SpaceTimeField u;
  SpaceTimeField v;
};

/// Boundary control values of one step, (left, right).
using EndpointValues = std::pair<double, double>;

inline EndpointValues endpoint_values(const BoundarySignal& g, std::size_t row) {
  return {g.at(row, Side::left), g.at(row, Side::right)};
}

namespace detail {

inline double boundary_value(const EndpointValues& g, Side s) { return s == Side::left ? g.first : g.second; }

/// Zero-based cell index of an endpoint.
inline std::size_t boundary_cell(const ProblemSetup& s, Side side) {
  return side == Side::left ? 0 : s.sg.cells() - 1;
}

/// Implicit operator of the chemical equation at one step and the weight
/// `carry` multiplying v^{n-1} on its right-hand side:
///
///   dx (v_j - v_j^{n-1})/dt + Dv sum_k (v_j - v_k)/dx + lambda dx v_j - mu dx u_j^{n-1}
///     = dx [(f_j)+ v_j^{n-1} + (f_j)- v_j] 1_c + P_j
///
/// with P the Robin flux sigma (g - v_j) (implicit) or the bilinear flux
/// (g)+ v_j^{n-1} + (g)- v_j at masked boundary cells. The right-hand side
/// parts that do not multiply v^{n-1} are left to the caller.
inline void assemble_chemical_operator(const ProblemSetup& s, std::span<const double> f_n, const EndpointValues& g_n,
                                       TridiagonalSystem& A, std::span<double> carry) {
  const std::size_t J = s.sg.cells();
  const double dx = s.sg.dx();
  const double dt = s.tg.dt();
  const double diff = s.phys.Dv / dx;
  for (std::size_t j = 0; j < J; ++j) {
    const double neighbours = (j > 0 ? 1.0 : 0.0) + (j + 1 < J ? 1.0 : 0.0);
    double d = dx / dt + s.phys.lambda * dx + diff * neighbours;
    double c = dx / dt;
    if (s.omega_c.member[j]) {
      d -= dx * negative_part(f_n[j]);
      c += dx * positive_part(f_n[j]);
    }
    A.diag[j] = d;
    carry[j] = c;
  }
  std::fill(A.lower.begin(), A.lower.end(), -diff);
  std::fill(A.upper.begin(), A.upper.end(), -diff);

  for (Side side : {Side::left, Side::right}) {
    if (!s.boundary_active(side)) continue;
    const std::size_t k = boundary_cell(s, side);
    const double g = boundary_value(g_n, side);
    if (s.bkind == BoundaryControlKind::robin) {
      A.diag[k] += s.phys.sigma;
    } else {
      A.diag[k] -= negative_part(g);
      carry[k] += positive_part(g);
    }
  }
}

/// Implicit operator of the cell equation at one step:
///
///   dx (u_j - u_j^{n-1})/dt + sum_k { Du (u_j - u_k)/dx + chi [ s+ u_j + s- u_k ] } = 0,
///   s = (v_k - v_j)/dx.
///
/// Column sums of the flux part vanish, so every column sums to dx/dt.
inline void assemble_cell_operator(const ProblemSetup& s, std::span<const double> v_new, TridiagonalSystem& M) {
  const std::size_t J = s.sg.cells();
  const double dx = s.sg.dx();
  const double diff = s.phys.Du / dx;
  const double chi = s.phys.chi;
  std::fill(M.diag.begin(), M.diag.end(), dx / s.tg.dt());
  for (std::size_t j = 0; j + 1 < J; ++j) {
    const double slope = (v_new[j + 1] - v_new[j]) / dx;  // seen from j towards j+1
    M.diag[j] += diff + chi * positive_part(slope);
    M.upper[j] = -diff + chi * negative_part(slope);
    M.diag[j + 1] += diff + chi * positive_part(-slope);
    M.lower[j] = -diff + chi * negative_part(-slope);
  }
}

/// Edge weight of the linearized chemotaxis flux between cells j and j+1:
/// H(v_{j+1} - v_j) u_j + H(v_j - v_{j+1}) u_{j+1}. Symmetric in the pair.
inline double chemotaxis_edge_weight(std::span<const double> u, std::span<const double> v, std::size_t j) {
  const double dv = v[j + 1] - v[j];
  return heaviside(dv) * u[j] + heaviside(-dv) * u[j + 1];
}

struct StepWorkspace {
  TridiagonalSystem system;
  std::vector<double> carry;
  std::vector<double> scratch;

  explicit StepWorkspace(std::size_t J) : system(J), carry(J), scratch(J) {}
};

inline void chemical_step(const ProblemSetup& s, std::span<const double> u_prev, std::span<const double> v_prev,
                          std::span<const double> f_n, const EndpointValues& g_n, std::span<double> v_out,
                          StepWorkspace& ws) {
  const std::size_t J = s.sg.cells();
  const double dx = s.sg.dx();
  assemble_chemical_operator(s, f_n, g_n, ws.system, ws.carry);
  for (std::size_t j = 0; j < J; ++j) ws.system.rhs[j] = ws.carry[j] * v_prev[j] + s.phys.mu * dx * u_prev[j];
  if (s.bkind == BoundaryControlKind::robin) {
    for (Side side : {Side::left, Side::right})
      if (s.boundary_active(side))
        ws.system.rhs[boundary_cell(s, side)] += s.phys.sigma * boundary_value(g_n, side);
  }
  solve_tridiagonal(ws.system.lower, ws.system.diag, ws.system.upper, ws.system.rhs, v_out, ws.scratch);
}

inline void cell_step(const ProblemSetup& s, std::span<const double> u_prev, std::span<const double> v_new,
                      std::span<double> u_out, StepWorkspace& ws) {
  const double dx = s.sg.dx();
  const double dt = s.tg.dt();
  assemble_cell_operator(s, v_new, ws.system);
  for (std::size_t j = 0; j < u_prev.size(); ++j) ws.system.rhs[j] = dx / dt * u_prev[j];
  solve_tridiagonal(ws.system.lower, ws.system.diag, ws.system.upper, ws.system.rhs, u_out, ws.scratch);
}

}  // namespace detail

/// One chemical step: v^n from (u^{n-1}, v^{n-1}) and the step-n controls.
inline CellField step_v(std::span<const double> u_prev, std::span<const double> v_prev, std::span<const double> f_n,
                        const EndpointValues& g_n, const ProblemSetup& setup) {
  detail::StepWorkspace ws(setup.sg.cells());
  CellField v(setup.sg.cells());
  detail::chemical_step(setup, u_prev, v_prev, f_n, g_n, v, ws);
  return v;
}

/// One cell step: u^n from u^{n-1} and the already updated v^n.
inline CellField step_u(std::span<const double> u_prev, std::span<const double> v_new, const ProblemSetup& setup) {
  detail::StepWorkspace ws(setup.sg.cells());
  CellField u(setup.sg.cells());
  detail::cell_step(setup, u_prev, v_new, u, ws);
  return u;
}

/// Runs the semi-implicit upwind scheme over all N steps.
inline StateTrajectory solve_forward(const ProblemSetup& setup, const ControlPair& controls) {
  check_controls(setup, controls);
  const std::size_t N = setup.tg.steps();
  const std::size_t J = setup.sg.cells();
  StateTrajectory out{SpaceTimeField(N + 1, J), SpaceTimeField(N + 1, J)};
  std::copy(setup.u0.begin(), setup.u0.end(), out.u.row(0).begin());
  std::copy(setup.v0.begin(), setup.v0.end(), out.v.row(0).begin());

  detail::StepWorkspace ws(J);
  for (std::size_t n = 1; n <= N; ++n) {
    try {
      detail::chemical_step(setup, out.u.row(n - 1), out.v.row(n - 1), controls.f.row(n - 1),
                            endpoint_values(controls.g, n - 1), out.v.row(n), ws);
      detail::cell_step(setup, out.u.row(n - 1), out.v.row(n), out.u.row(n), ws);
    } catch (const SolverError& e) {
      throw SolverError(std::string("forward solve: ") + e.what(), n);
    }
  }
  return out;
}

/// Total mass sum_j dx w_j of one level.
inline double total_mass(std::span<const double> w, const SpatialGrid& sg) {
  double s = 0.0;
  for (double x : w) s += x;
  return sg.dx() * s;
}

/// Boundary flux P_k^n entering at endpoint `side` during step n (1-based).
inline double boundary_flux(const ProblemSetup& s, const ControlPair& c, const StateTrajectory& st, std::size_t n,
                            Side side) {
  if (!s.boundary_active(side)) return 0.0;
  const std::size_t k = detail::boundary_cell(s, side);
  const double g = c.g.at(n - 1, side);
  if (s.bkind == BoundaryControlKind::robin) return s.phys.sigma * (g - st.v(n, k));
  return positive_part(g) * st.v(n - 1, k) + negative_part(g) * st.v(n, k);
}

struct BalanceResidual {
  double residual = 0.0;  // signed imbalance of the global chemical budget
  double scale = 0.0;     // sum of magnitudes of the budget terms
};

/// Imbalance of the discrete global chemical budget over step n (1-based):
///   sum dx (v^n - v^{n-1})/dt + lambda sum dx v^n - mu sum dx u^{n-1}
///     - sum dx [(f)+ v^{n-1} + (f)- v^n] 1_c - sum_k P_k^n.
inline BalanceResidual chemical_balance(const ProblemSetup& s, const ControlPair& c, const StateTrajectory& st,
                                        std::size_t n) {
  const double dx = s.sg.dx();
  const double dt = s.tg.dt();
  BalanceResidual b;
  auto add = [&b](double term) {
    b.residual += term;
    b.scale += std::abs(term);
  };
  double storage = 0.0, decay = 0.0, production = 0.0, control = 0.0;
  for (std::size_t j = 0; j < s.sg.cells(); ++j) {
    storage += dx * (st.v(n, j) - st.v(n - 1, j)) / dt;
    decay += s.phys.lambda * dx * st.v(n, j);
    production += s.phys.mu * dx * st.u(n - 1, j);
    if (s.omega_c.member[j]) {
      const double f = c.f(n - 1, j);
      control += dx * (positive_part(f) * st.v(n - 1, j) + negative_part(f) * st.v(n, j));
    }
  }
  add(storage);
  add(decay);
  add(-production);
  add(-control);
  for (Side side : {Side::left, Side::right}) add(-boundary_flux(s, c, st, n, side));
  // the storage term is a difference; count both levels in the scale
  double level_scale = 0.0;
  for (std::size_t j = 0; j < s.sg.cells(); ++j) level_scale += dx * (std::abs(st.v(n, j)) + std::abs(st.v(n - 1, j))) / dt;
  b.scale = std::max(b.scale, level_scale);
  return b;
}

}  // namespace kscontrol

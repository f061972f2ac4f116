#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "kscontrol/discretization.hpp"
#include "kscontrol/problem.hpp"
#include "kscontrol/state_solver.hpp"
#include "kscontrol/tridiagonal.hpp"

namespace kscontrol {

/// Tangent states (U, V) on levels 0..N; row 0 is identically zero.
struct SensitivityTrajectory {
  SpaceTimeField U;
  SpaceTimeField V;
};

/// d/df of the distributed source dx[(f)+ v^{n-1} + (f)- v^n], per unit dx:
/// H(f) v^{n-1} + H(-f) v^n at cell j of step n (1-based).
inline double distributed_coupling(const ControlPair& c, const StateTrajectory& st, std::size_t n, std::size_t j) {
  const double f = c.f(n - 1, j);
  return heaviside(f) * st.v(n - 1, j) + heaviside(-f) * st.v(n, j);
}

/// d/dg of the boundary flux at endpoint `side` of step n (1-based):
/// sigma for Robin, H(g) v^{n-1} + H(-g) v^n for bilinear.
inline double boundary_coupling(const ProblemSetup& s, const ControlPair& c, const StateTrajectory& st, std::size_t n,
                                Side side) {
  if (!s.boundary_active(side)) return 0.0;
  if (s.bkind == BoundaryControlKind::robin) return s.phys.sigma;
  const std::size_t k = detail::boundary_cell(s, side);
  const double g = c.g.at(n - 1, side);
  return heaviside(g) * st.v(n - 1, k) + heaviside(-g) * st.v(n, k);
}

/// Linearization of the scheme around (controls, states) in the direction
/// `direction`. One pass handles an arbitrary direction field; the unit
/// directions (one f_i^m or g_l^m at a time) are special cases.
inline SensitivityTrajectory solve_sensitivity(const ProblemSetup& setup, const ControlPair& controls,
                                               const StateTrajectory& states, const ControlPair& direction) {
  check_controls(setup, controls);
  check_controls(setup, direction);
  const std::size_t N = setup.tg.steps();
  const std::size_t J = setup.sg.cells();
  const double dx = setup.sg.dx();
  const double dt = setup.tg.dt();
  const double chi = setup.phys.chi;

  SensitivityTrajectory out{SpaceTimeField(N + 1, J), SpaceTimeField(N + 1, J)};
  detail::StepWorkspace ws(J);

  for (std::size_t n = 1; n <= N; ++n) {
    try {
      // V^n
      detail::assemble_chemical_operator(setup, controls.f.row(n - 1), endpoint_values(controls.g, n - 1),
                                         ws.system, ws.carry);
      auto rhs = std::span<double>(ws.system.rhs);
      for (std::size_t j = 0; j < J; ++j) {
        rhs[j] = ws.carry[j] * out.V(n - 1, j) + setup.phys.mu * dx * out.U(n - 1, j);
        if (setup.omega_c.member[j])
          rhs[j] += dx * distributed_coupling(controls, states, n, j) * direction.f(n - 1, j);
      }
      for (Side side : {Side::left, Side::right})
        if (setup.boundary_active(side))
          rhs[detail::boundary_cell(setup, side)] +=
              boundary_coupling(setup, controls, states, n, side) * direction.g.at(n - 1, side);
      solve_tridiagonal(ws.system.lower, ws.system.diag, ws.system.upper, ws.system.rhs, out.V.row(n), ws.scratch);

      // U^n
      const auto u = states.u.row(n);
      const auto v = states.v.row(n);
      const auto V = out.V.row(n);
      detail::assemble_cell_operator(setup, v, ws.system);
      for (std::size_t j = 0; j < J; ++j) rhs[j] = dx / dt * out.U(n - 1, j);
      for (std::size_t j = 0; j + 1 < J; ++j) {
        const double flux = chi * detail::chemotaxis_edge_weight(u, v, j) * (V[j + 1] - V[j]) / dx;
        rhs[j] -= flux;
        rhs[j + 1] += flux;
      }
      solve_tridiagonal(ws.system.lower, ws.system.diag, ws.system.upper, ws.system.rhs, out.U.row(n), ws.scratch);
    } catch (const SolverError& e) {
      throw SolverError(std::string("sensitivity solve: ") + e.what(), n);
    }
  }
  return out;
}

/// Directional derivative of the reduced cost along `direction`, by the
/// chain rule through the tangent states.
inline double directional_derivative_via_sensitivity(const ProblemSetup& setup, const ControlPair& controls,
                                                     const StateTrajectory& states, const ControlPair& direction) {
  const SensitivityTrajectory sens = solve_sensitivity(setup, controls, states, direction);
  const std::size_t N = setup.tg.steps();
  const std::size_t J = setup.sg.cells();
  const double dx = setup.sg.dx();
  const double dt = setup.tg.dt();
  const double T = setup.tg.horizon();

  double tracking = 0.0, distributed = 0.0, boundary = 0.0;
  for (std::size_t n = 1; n <= N; ++n) {
    for (std::size_t j = 0; j < J; ++j) {
      if (setup.omega_o.member[j]) tracking += (states.u(n, j) - setup.u_d(n - 1, j)) * sens.U(n, j);
      if (setup.omega_c.member[j]) distributed += controls.f(n - 1, j) * direction.f(n - 1, j);
    }
    for (Side side : {Side::left, Side::right})
      if (setup.boundary_active(side)) boundary += controls.g.at(n - 1, side) * direction.g.at(n - 1, side);
  }
  double d = dt * dx * tracking / (T * setup.omega_o.measure);
  if (!setup.omega_c.empty()) d += setup.weights.alpha_f * dt * dx * distributed / (T * setup.omega_c.measure);
  d += setup.weights.alpha_g * dt * boundary / T;
  return d;
}

}  // namespace kscontrol

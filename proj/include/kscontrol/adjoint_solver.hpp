#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "kscontrol/discretization.hpp"
#include "kscontrol/problem.hpp"
#include "kscontrol/state_solver.hpp"
#include "kscontrol/tridiagonal.hpp"

namespace kscontrol {

/// Adjoint states on levels 1..N+1. Row n-1 holds level n; the last row is
/// the terminal level N+1 and stays zero.
struct AdjointTrajectory {
  SpaceTimeField phi;
  SpaceTimeField psi;

  std::span<const double> phi_at(std::size_t n) const { return phi.row(n - 1); }
  std::span<const double> psi_at(std::size_t n) const { return psi.row(n - 1); }
};

namespace detail {

/// phi^n from the transposed cell operator of step n:
///   dx (phi_j - phi_j^{n+1})/dt + Du sum_k (phi_j - phi_k)/dx - chi sum_k s+ (phi_k - phi_j)
///     - mu dx psi_j^{n+1} = dx (u_j^n - u_d)/(T |Omega_o|) 1_o
inline void cell_adjoint_step(const ProblemSetup& s, std::span<const double> phi_next,
                              std::span<const double> psi_next, std::span<const double> u_n,
                              std::span<const double> ud_n, std::span<const double> v_n, std::span<double> phi_out,
                              StepWorkspace& ws) {
  const std::size_t J = s.sg.cells();
  const double dx = s.sg.dx();
  const double dt = s.tg.dt();
  const double weight = 1.0 / (s.tg.horizon() * s.omega_o.measure);
  assemble_cell_operator(s, v_n, ws.system);
  std::swap(ws.system.lower, ws.system.upper);  // transpose
  for (std::size_t j = 0; j < J; ++j) {
    double r = dx / dt * phi_next[j] + s.phys.mu * dx * psi_next[j];
    if (s.omega_o.member[j]) r += weight * dx * (u_n[j] - ud_n[j]);
    ws.system.rhs[j] = r;
  }
  solve_tridiagonal(ws.system.lower, ws.system.diag, ws.system.upper, ws.system.rhs, phi_out, ws.scratch);
}

/// psi^n from the (symmetric) chemical operator of step n, the look-ahead
/// carry of step n+1 and the chemotaxis coupling to phi^n:
///   dx (psi_j - psi_j^{n+1})/dt + Dv sum_k (psi_j - psi_k)/dx + lambda dx psi_j
///     - dx [(f_j^n)- psi_j + (f_j^{n+1})+ psi_j^{n+1}] 1_c - (P_v^* psi)_j
///     + chi sum_k [H(v_j - v_k) u_k + H(v_k - v_j) u_j] (phi_k - phi_j)/dx = 0
inline void chemical_adjoint_step(const ProblemSetup& s, std::span<const double> psi_next,
                                  std::span<const double> phi_n, std::span<const double> u_n,
                                  std::span<const double> v_n, std::span<const double> f_n,
                                  const EndpointValues& g_n, std::span<const double> f_next,
                                  const EndpointValues& g_next, std::span<double> psi_out, StepWorkspace& ws) {
  const std::size_t J = s.sg.cells();
  const double dx = s.sg.dx();
  const double chi = s.phys.chi;
  // look-ahead carry of step n+1; only its product with psi^{n+1} is used
  assemble_chemical_operator(s, f_next, g_next, ws.system, ws.carry);
  for (std::size_t j = 0; j < J; ++j) ws.system.rhs[j] = ws.carry[j] * psi_next[j];
  assemble_chemical_operator(s, f_n, g_n, ws.system, ws.carry);
  for (std::size_t j = 0; j + 1 < J; ++j) {
    const double q = chi * chemotaxis_edge_weight(u_n, v_n, j) * (phi_n[j + 1] - phi_n[j]) / dx;
    ws.system.rhs[j] -= q;
    ws.system.rhs[j + 1] += q;
  }
  solve_tridiagonal(ws.system.lower, ws.system.diag, ws.system.upper, ws.system.rhs, psi_out, ws.scratch);
}

}  // namespace detail

/// One phi step (level n) given the level-(n+1) adjoints and the level-n states.
inline CellField step_phi(std::span<const double> phi_next, std::span<const double> psi_next,
                          std::span<const double> u_n, std::span<const double> v_n, std::span<const double> ud_n,
                          const ProblemSetup& setup) {
  detail::StepWorkspace ws(setup.sg.cells());
  CellField phi(setup.sg.cells());
  detail::cell_adjoint_step(setup, phi_next, psi_next, u_n, ud_n, v_n, phi, ws);
  return phi;
}

/// One psi step (level n). `f_next`/`g_next` are the step-(n+1) controls,
/// zero at n = N.
inline CellField step_psi(std::span<const double> psi_next, std::span<const double> phi_n,
                          std::span<const double> u_n, std::span<const double> v_n, std::span<const double> f_n,
                          const EndpointValues& g_n, std::span<const double> f_next, const EndpointValues& g_next,
                          const ProblemSetup& setup) {
  detail::StepWorkspace ws(setup.sg.cells());
  CellField psi(setup.sg.cells());
  detail::chemical_adjoint_step(setup, psi_next, phi_n, u_n, v_n, f_n, g_n, f_next, g_next, psi, ws);
  return psi;
}

/// Backward sweep n = N..1 of the discrete adjoint; the exact transpose of
/// the tangent scheme in `solve_sensitivity`.
inline AdjointTrajectory solve_backward(const ProblemSetup& setup, const ControlPair& controls,
                                        const StateTrajectory& states) {
  check_controls(setup, controls);
  const std::size_t N = setup.tg.steps();
  const std::size_t J = setup.sg.cells();
  if (states.u.rows() != N + 1 || states.u.cols() != J || !states.v.same_shape(states.u))
    throw ValidationError(ErrorCode::shape_mismatch, "state trajectory must be (N+1) x J");

  AdjointTrajectory out{SpaceTimeField(N + 1, J), SpaceTimeField(N + 1, J)};
  detail::StepWorkspace ws(J);
  const std::vector<double> zero_row(J, 0.0);

  for (std::size_t n = N; n >= 1; --n) {
    try {
      detail::cell_adjoint_step(setup, out.phi.row(n), out.psi.row(n), states.u.row(n), setup.u_d.row(n - 1),
                                states.v.row(n), out.phi.row(n - 1), ws);
      const bool last = (n == N);
      const std::span<const double> f_next = last ? std::span<const double>(zero_row) : controls.f.row(n);
      const EndpointValues g_next = last ? EndpointValues{0.0, 0.0} : endpoint_values(controls.g, n);
      detail::chemical_adjoint_step(setup, out.psi.row(n), out.phi.row(n - 1), states.u.row(n), states.v.row(n),
                                    controls.f.row(n - 1), endpoint_values(controls.g, n - 1), f_next, g_next,
                                    out.psi.row(n - 1), ws);
    } catch (const SolverError& e) {
      throw SolverError(std::string("adjoint solve: ") + e.what(), n);
    }
  }
  return out;
}

}  // namespace kscontrol

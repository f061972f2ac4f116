#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "kscontrol/adjoint_solver.hpp"
#include "kscontrol/discretization.hpp"
#include "kscontrol/problem.hpp"
#include "kscontrol/sensitivity_solver.hpp"
#include "kscontrol/state_solver.hpp"

namespace kscontrol {

/// Gradient of the reduced cost, identified through the discrete L2
/// products (dt dx on f, dt on g).
struct ControlGradient {
  SpaceTimeField wrt_f;
  BoundarySignal wrt_g;
};

/// The three parts of the discrete cost.
struct CostBreakdown {
  double tracking = 0.0;
  double distributed = 0.0;
  double boundary = 0.0;
  double total() const { return tracking + distributed + boundary; }
};

inline CostBreakdown evaluate_cost_terms(const StateTrajectory& states, const ControlPair& controls,
                                         const ProblemSetup& setup) {
  const std::size_t N = setup.tg.steps();
  const std::size_t J = setup.sg.cells();
  const double dx = setup.sg.dx();
  const double dt = setup.tg.dt();
  const double T = setup.tg.horizon();
  if (!states.u.all_finite() || !controls.f.all_finite() || !controls.g.table().all_finite())
    throw SolverError("cost evaluation: non-finite state or control");

  double track = 0.0, dist = 0.0, bnd = 0.0;
  for (std::size_t n = 1; n <= N; ++n) {
    for (std::size_t j = 0; j < J; ++j) {
      if (setup.omega_o.member[j]) {
        const double r = states.u(n, j) - setup.u_d(n - 1, j);
        track += r * r;
      }
      if (setup.omega_c.member[j]) dist += controls.f(n - 1, j) * controls.f(n - 1, j);
    }
    for (Side side : {Side::left, Side::right})
      if (setup.boundary_active(side)) bnd += controls.g.at(n - 1, side) * controls.g.at(n - 1, side);
  }
  CostBreakdown c;
  c.tracking = 0.5 * dt * dx * track / (T * setup.omega_o.measure);
  if (!setup.omega_c.empty()) c.distributed = 0.5 * setup.weights.alpha_f * dt * dx * dist / (T * setup.omega_c.measure);
  c.boundary = 0.5 * setup.weights.alpha_g * dt * bnd / T;
  return c;
}

/// Discrete cost J(u, f, g).
inline double evaluate_cost(const StateTrajectory& states, const ControlPair& controls, const ProblemSetup& setup) {
  return evaluate_cost_terms(states, controls, setup).total();
}

/// Reduced cost J~(f, g) = J(u(f, g), f, g) with a fresh forward solve.
inline double reduced_cost(const ProblemSetup& setup, const ControlPair& controls) {
  return evaluate_cost(solve_forward(setup, controls), controls, setup);
}

/// Gradient from the adjoint states:
///   J~_f = psi^n [H(f) v^{n-1} + H(-f) v^n] 1_c + alpha_f/(T |Omega_c|) f 1_c
///   J~_g = psi_k^n P_g + alpha_g/T g        on active endpoints.
inline ControlGradient assemble_gradient(const StateTrajectory& states, const AdjointTrajectory& adjoints,
                                         const ControlPair& controls, const ProblemSetup& setup) {
  const std::size_t N = setup.tg.steps();
  const std::size_t J = setup.sg.cells();
  const double T = setup.tg.horizon();
  ControlGradient grad{SpaceTimeField(N, J), BoundarySignal(N)};
  const double reg_f = setup.omega_c.empty() ? 0.0 : setup.weights.alpha_f / (T * setup.omega_c.measure);
  const double reg_g = setup.weights.alpha_g / T;

  for (std::size_t n = 1; n <= N; ++n) {
    const auto psi = adjoints.psi_at(n);
    for (std::size_t j = 0; j < J; ++j) {
      if (!setup.omega_c.member[j]) continue;
      grad.wrt_f(n - 1, j) = psi[j] * distributed_coupling(controls, states, n, j) + reg_f * controls.f(n - 1, j);
    }
    for (Side side : {Side::left, Side::right}) {
      if (!setup.boundary_active(side)) continue;
      const std::size_t k = detail::boundary_cell(setup, side);
      grad.wrt_g.at(n - 1, side) =
          psi[k] * boundary_coupling(setup, controls, states, n, side) + reg_g * controls.g.at(n - 1, side);
    }
  }
  return grad;
}

/// Forward solve, backward solve and gradient assembly in one call.
struct Evaluation {
  StateTrajectory states;
  AdjointTrajectory adjoints;
  ControlGradient gradient;
  double cost = 0.0;
};

inline Evaluation evaluate(const ProblemSetup& setup, const ControlPair& controls) {
  Evaluation e;
  e.states = solve_forward(setup, controls);
  e.cost = evaluate_cost(e.states, controls, setup);
  e.adjoints = solve_backward(setup, controls, e.states);
  e.gradient = assemble_gradient(e.states, e.adjoints, controls, setup);
  return e;
}

/// sqrt(sum dt dx (J~_f)^2 + sum dt (J~_g)^2), the norm dual to the products
/// used for the gradient identification.
inline double gradient_norm(const ControlGradient& grad, const TimeGrid& tg, const SpatialGrid& sg,
                            const BoundaryMask& bmask) {
  double sf = 0.0;
  for (double x : grad.wrt_f.values()) sf += x * x;
  double sg2 = 0.0;
  for (std::size_t r = 0; r < grad.wrt_g.steps(); ++r) {
    if (bmask.left) sg2 += grad.wrt_g.at(r, Side::left) * grad.wrt_g.at(r, Side::left);
    if (bmask.right) sg2 += grad.wrt_g.at(r, Side::right) * grad.wrt_g.at(r, Side::right);
  }
  return std::sqrt(tg.dt() * sg.dx() * sf + tg.dt() * sg2);
}

/// Largest gradient component in absolute value.
inline double gradient_max_norm(const ControlGradient& grad) {
  double m = 0.0;
  for (double x : grad.wrt_f.values()) m = std::max(m, std::abs(x));
  for (double x : grad.wrt_g.table().values()) m = std::max(m, std::abs(x));
  return m;
}

/// <grad, direction> in the same discrete products.
inline double pair(const ControlGradient& grad, const ControlPair& direction, const ProblemSetup& setup) {
  BoundaryMask active{setup.boundary_active(Side::left), setup.boundary_active(Side::right)};
  return inner_product(grad.wrt_f, direction.f, setup.tg, setup.sg) +
         boundary_inner_product(grad.wrt_g, direction.g, setup.tg, active);
}

/// controls + s * direction
inline ControlPair shifted(const ControlPair& controls, const ControlPair& direction, double s) {
  ControlPair out = controls;
  out.f.axpy(s, direction.f);
  out.g.table().axpy(s, direction.g.table());
  return out;
}

/// Central difference [J~(c + h d) - J~(c - h d)] / (2h).
inline double fd_directional_derivative(const ProblemSetup& setup, const ControlPair& controls,
                                        const ControlPair& direction, double h) {
  if (!(h > 0.0)) throw ValidationError(ErrorCode::non_finite_value, "finite-difference step must be positive");
  const double plus = reduced_cost(setup, shifted(controls, direction, h));
  const double minus = reduced_cost(setup, shifted(controls, direction, -h));
  return (plus - minus) / (2.0 * h);
}

/// Reduced cost along controls + s * direction for each amplitude s.
inline std::vector<std::pair<double, double>> perturbation_scan(const ProblemSetup& setup,
                                                                const ControlPair& controls,
                                                                const ControlPair& direction,
                                                                std::span<const double> amplitudes) {
  std::vector<std::pair<double, double>> out;
  out.reserve(amplitudes.size());
  for (double s : amplitudes) {
    if (!std::isfinite(s)) throw ValidationError(ErrorCode::non_finite_value, "perturbation amplitude is not finite");
    out.emplace_back(s, reduced_cost(setup, shifted(controls, direction, s)));
  }
  return out;
}

/// The constant direction: 1 on every control cell and active endpoint.
inline ControlPair constant_direction(const ProblemSetup& setup) {
  ControlPair d = ControlPair::zeros(setup);
  for (double& x : d.f.values()) x = 1.0;
  for (double& x : d.g.table().values()) x = 1.0;
  d.restrict_to(setup);
  return d;
}

}  // namespace kscontrol

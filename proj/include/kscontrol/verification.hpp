#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "kscontrol/cost_gradient.hpp"
#include "kscontrol/random_instances.hpp"
#include "kscontrol/sensitivity_solver.hpp"
#include "kscontrol/state_solver.hpp"

namespace kscontrol::verification {

/// Worst-case conservation, positivity and chemical-budget measurements over a
/// batch of random forward solves.
struct InvariantReport {
  std::size_t instances = 0;
  double max_mass_drift = 0.0;        // relative to the initial mass
  double min_value = 0.0;             // over u and v, all levels
  double max_balance_residual = 0.0;  // relative to the budget-term magnitudes
};

inline InvariantReport invariant_sweep(std::uint64_t seed, std::size_t count, std::size_t min_size = 10,
                                       std::size_t max_size = 100) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> size(min_size, max_size);
  InvariantReport r;
  r.min_value = INFINITY;
  for (std::size_t i = 0; i < count; ++i) {
    random::RandomSetupOptions o;
    o.cells = size(rng);
    o.steps = size(rng);
    o.bkind = i % 2 ? BoundaryControlKind::robin : BoundaryControlKind::bilinear;
    o.horizon = random::uniform(rng, 0.01, 0.5);
    ProblemSetup s = random::random_setup(rng, o);
    // vanishing patches in the initial data make positivity a sharp test
    std::bernoulli_distribution vanish(0.3);
    for (double& x : s.u0)
      if (vanish(rng)) x = 0.0;
    for (double& x : s.v0)
      if (vanish(rng)) x = 0.0;
    s.u0[0] = std::max(s.u0[0], 0.5);
    const ControlPair c = random::random_controls(rng, s, 0.0, 3.0);
    const StateTrajectory st = solve_forward(s, c);

    const double m0 = total_mass(st.u.row(0), s.sg);
    for (std::size_t n = 0; n <= s.tg.steps(); ++n)
      r.max_mass_drift = std::max(r.max_mass_drift, std::abs(total_mass(st.u.row(n), s.sg) - m0) / m0);
    for (double x : st.u.values()) r.min_value = std::min(r.min_value, x);
    for (double x : st.v.values()) r.min_value = std::min(r.min_value, x);
    for (std::size_t n = 1; n <= s.tg.steps(); ++n) {
      const BalanceResidual b = chemical_balance(s, c, st, n);
      r.max_balance_residual = std::max(r.max_balance_residual, std::abs(b.residual) / std::max(b.scale, 1e-300));
    }
    ++r.instances;
  }
  return r;
}

/// Adjoint gradient against central differences of the reduced cost along one
/// random direction, at several step sizes.
struct GradientCheck {
  BoundaryControlKind bkind = BoundaryControlKind::bilinear;
  double alpha_f = 0.0;
  double alpha_g = 0.0;
  double adjoint = 0.0;
  std::vector<double> steps;
  std::vector<double> fd;
  std::vector<double> relative_errors;
};

inline double relative_gap(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

inline GradientCheck gradient_check(std::uint64_t seed, BoundaryControlKind bkind, double alpha_f, double alpha_g,
                                    const std::vector<double>& steps, std::size_t cells = 20,
                                    std::size_t step_count = 20) {
  std::mt19937_64 rng(seed);
  random::RandomSetupOptions o;
  o.cells = cells;
  o.steps = step_count;
  o.bkind = bkind;
  o.alpha_f = alpha_f;
  o.alpha_g = alpha_g;
  const ProblemSetup s = random::random_setup(rng, o);
  const ControlPair c = random::random_controls(rng, s);
  const ControlPair d = random::random_direction(rng, s);

  GradientCheck g;
  g.bkind = bkind;
  g.alpha_f = alpha_f;
  g.alpha_g = alpha_g;
  g.adjoint = pair(evaluate(s, c).gradient, d, s);
  for (double h : steps) {
    const double fd = fd_directional_derivative(s, c, d, h);
    g.steps.push_back(h);
    g.fd.push_back(fd);
    g.relative_errors.push_back(relative_gap(g.adjoint, fd));
  }
  return g;
}

/// Largest relative gap between the tangent-based directional derivative and
/// the adjoint gradient paired with the same direction.
inline double duality_gap(std::uint64_t seed, std::size_t directions, std::size_t cells = 16,
                          std::size_t step_count = 10) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (std::size_t i = 0; i < directions; ++i) {
    random::RandomSetupOptions o;
    o.cells = cells;
    o.steps = step_count;
    o.bkind = i % 2 ? BoundaryControlKind::robin : BoundaryControlKind::bilinear;
    o.alpha_f = random::uniform(rng, 0.0, 1.0);
    o.alpha_g = random::uniform(rng, 0.0, 1.0);
    const ProblemSetup s = random::random_setup(rng, o);
    const ControlPair c = random::random_controls(rng, s);
    const ControlPair d = random::random_direction(rng, s);
    const Evaluation e = evaluate(s, c);
    const double tangent = directional_derivative_via_sensitivity(s, c, e.states, d);
    worst = std::max(worst, relative_gap(tangent, pair(e.gradient, d, s)));
  }
  return worst;
}

}  // namespace kscontrol::verification

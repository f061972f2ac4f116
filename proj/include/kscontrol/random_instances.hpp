#pragma once

/// Random problem instances for invariant and oracle checks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <tuple>

#include "kscontrol/discretization.hpp"
#include "kscontrol/problem.hpp"

namespace kscontrol::random {

struct RandomSetupOptions {
  std::size_t cells = 20;
  std::size_t steps = 20;
  BoundaryControlKind bkind = BoundaryControlKind::bilinear;
  double alpha_f = 0.0;
  double alpha_g = 0.0;
  double horizon = 0.05;
  bool random_regions = true;
};

inline double uniform(std::mt19937_64& rng, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng);
}

/// Random interval containing at least one cell center of a [-1, 1] grid.
inline RegionMask random_region(std::mt19937_64& rng, const SpatialGrid& sg) {
  for (;;) {
    double a = uniform(rng, -1.2, 0.8);
    double b = uniform(rng, a + 0.2, 1.2);
    try {
      return interval_to_mask(a, b, sg);
    } catch (const ValidationError&) {
    }
  }
}

inline ProblemSetup random_setup(std::mt19937_64& rng, const RandomSetupOptions& o) {
  ProblemSetup s;
  std::tie(s.sg, s.tg) = build_grids(1.0, static_cast<long long>(o.cells), o.horizon, static_cast<long long>(o.steps));
  s.phys.Du = uniform(rng, 0.05, 0.5);
  s.phys.chi = uniform(rng, 0.5, 2.0);
  s.phys.Dv = uniform(rng, 0.05, 0.5);
  s.phys.lambda = uniform(rng, 0.0, 1.0);
  s.phys.mu = uniform(rng, 0.2, 2.0);
  s.phys.sigma = uniform(rng, 0.5, 2.0);
  s.weights = {o.alpha_f, o.alpha_g};
  s.omega_c = o.random_regions ? random_region(rng, s.sg) : RegionMask::whole(s.sg);
  s.omega_o = o.random_regions ? random_region(rng, s.sg) : RegionMask::whole(s.sg);
  s.bkind = o.bkind;
  s.bmask = {true, true};
  if (o.bkind != BoundaryControlKind::none && o.random_regions) {
    const int pick = std::uniform_int_distribution<int>(0, 2)(rng);
    s.bmask = {pick != 2, pick != 1};
  }
  s.u0.resize(o.cells);
  s.v0.resize(o.cells);
  for (std::size_t j = 0; j < o.cells; ++j) {
    s.u0[j] = uniform(rng, 0.2, 2.0);
    s.v0[j] = uniform(rng, 0.2, 3.0);
  }
  s.u_d = SpaceTimeField(o.steps, o.cells);
  for (double& x : s.u_d.values()) x = uniform(rng, 0.5, 1.5);
  return s;
}

/// Random value with |x| in [lo, hi] and a random sign.
inline double signed_away_from_zero(std::mt19937_64& rng, double lo, double hi) {
  const double m = uniform(rng, lo, hi);
  return std::bernoulli_distribution(0.5)(rng) ? m : -m;
}

/// Random controls bounded away from the kinks f = 0, g = 0. Robin controls
/// are kept positive.
inline ControlPair random_controls(std::mt19937_64& rng, const ProblemSetup& s, double lo = 0.1, double hi = 2.0) {
  ControlPair c = ControlPair::zeros(s);
  for (double& x : c.f.values()) x = signed_away_from_zero(rng, lo, hi);
  for (double& x : c.g.table().values())
    x = s.bkind == BoundaryControlKind::robin ? uniform(rng, lo, hi) : signed_away_from_zero(rng, lo, hi);
  c.restrict_to(s);
  return c;
}

/// Standard normal direction restricted to the control masks.
inline ControlPair random_direction(std::mt19937_64& rng, const ProblemSetup& s) {
  std::normal_distribution<double> nd;
  ControlPair d = ControlPair::zeros(s);
  for (double& x : d.f.values()) x = nd(rng);
  for (double& x : d.g.table().values()) x = nd(rng);
  d.restrict_to(s);
  return d;
}

}  // namespace kscontrol::random

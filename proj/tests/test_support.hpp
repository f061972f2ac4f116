#pragma once

#include <algorithm>
#include <cmath>

#include "kscontrol/random_instances.hpp"

namespace kst {

using namespace kscontrol;
using namespace kscontrol::random;

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

/// Whole-domain regions, no boundary control, uniform data.
inline ProblemSetup uniform_setup(std::size_t J, std::size_t N, double T, double u, double v, double target) {
  ProblemSetup s;
  std::tie(s.sg, s.tg) = build_grids(1.0, static_cast<long long>(J), T, static_cast<long long>(N));
  s.omega_c = RegionMask::whole(s.sg);
  s.omega_o = RegionMask::whole(s.sg);
  s.u0.assign(J, u);
  s.v0.assign(J, v);
  s.u_d = SpaceTimeField(N, J, target);
  return s;
}

}  // namespace kst

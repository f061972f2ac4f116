#include <gtest/gtest.h>

#include <random>

#include "kscontrol/adjoint_solver.hpp"
#include "kscontrol/cost_gradient.hpp"
#include "kscontrol/sensitivity_solver.hpp"
#include "test_support.hpp"

using namespace kscontrol;

TEST(StepPhi, ZeroResidualZeroSources) {
  const auto s = kst::uniform_setup(5, 2, 0.1, 1.0, 2.0, 1.0);
  const CellField u(5, 1.0), v(5, 2.0), zero(5, 0.0), ud(5, 1.0);
  for (double x : step_phi(zero, zero, u, v, ud, s)) EXPECT_EQ(x, 0.0);
}

TEST(StepPhi, SingleUnknownEquation) {
  // Uniform data on two cells decouple into the one-unknown equation.
  const auto s = kst::uniform_setup(2, 4, 0.2, 1.0, 2.0, 0.0);
  const double r = 0.7;
  const CellField u(2, 1.0 + r), v(2, 2.0), zero(2, 0.0), ud(2, 1.0);
  const double expected = s.tg.dt() * r / (s.tg.horizon() * s.omega_o.measure);
  for (double x : step_phi(zero, zero, u, v, ud, s)) EXPECT_NEAR(x, expected, 1e-15);
}

TEST(StepPsi, HomogeneousAndSingleUnknown) {
  auto s = kst::uniform_setup(2, 4, 0.2, 1.0, 2.0, 1.0);
  const CellField u(2, 1.0), v(2, 2.0), zero(2, 0.0);
  for (double x : step_psi(zero, zero, u, v, zero, {0, 0}, zero, {0, 0}, s)) EXPECT_EQ(x, 0.0);
  const CellField next(2, 0.9);
  const double expected = 0.9 / (1.0 + s.phys.lambda * s.tg.dt());
  for (double x : step_psi(next, zero, u, v, zero, {0, 0}, zero, {0, 0}, s)) EXPECT_NEAR(x, expected, 1e-15);
}

TEST(AdjointSteps, LinearInTheirInputs) {
  std::mt19937_64 rng(8);
  kst::RandomSetupOptions o;
  o.cells = 12;
  const auto s = kst::random_setup(rng, o);
  const auto c = kst::random_controls(rng, s);
  const auto st = solve_forward(s, c);
  const std::size_t J = s.sg.cells();
  auto vec = [&] {
    CellField x(J);
    for (auto& e : x) e = kst::uniform(rng, -1, 1);
    return x;
  };
  const CellField a1 = vec(), b1 = vec(), a2 = vec(), b2 = vec(), zero(J, 0.0);
  CellField a12(J), b12(J);
  for (std::size_t j = 0; j < J; ++j) {
    a12[j] = a1[j] + 2 * a2[j];
    b12[j] = b1[j] + 2 * b2[j];
  }
  const std::size_t n = 3;
  const auto u = st.u.row(n), v = st.v.row(n);
  const CellField ud(u.begin(), u.end());  // zero tracking residual

  const auto p1 = step_phi(a1, b1, u, v, ud, s), p2 = step_phi(a2, b2, u, v, ud, s), p12 = step_phi(a12, b12, u, v, ud, s);
  for (std::size_t j = 0; j < J; ++j) EXPECT_NEAR(p12[j], p1[j] + 2 * p2[j], 1e-12);

  const auto g = endpoint_values(c.g, n - 1), gn = endpoint_values(c.g, n);
  const auto q1 = step_psi(a1, b1, u, v, c.f.row(n - 1), g, c.f.row(n), gn, s);
  const auto q2 = step_psi(a2, b2, u, v, c.f.row(n - 1), g, c.f.row(n), gn, s);
  const auto q12 = step_psi(a12, b12, u, v, c.f.row(n - 1), g, c.f.row(n), gn, s);
  for (std::size_t j = 0; j < J; ++j) EXPECT_NEAR(q12[j], q1[j] + 2 * q2[j], 1e-12);
}

TEST(SolveBackward, PerfectTrackingGivesZeroAdjoints) {
  auto s = kst::uniform_setup(8, 5, 0.1, 2.0, 2.0, 2.0);
  s.phys.lambda = s.phys.mu = 1.0;
  const auto c = ControlPair::zeros(s);
  const auto adj = solve_backward(s, c, solve_forward(s, c));
  for (double x : adj.phi.values()) EXPECT_NEAR(x, 0.0, 1e-14);
  for (double x : adj.psi.values()) EXPECT_NEAR(x, 0.0, 1e-14);
}

TEST(SolveBackward, SuperpositionOfResiduals) {
  std::mt19937_64 rng(21);
  auto s = kst::random_setup(rng, {});
  const auto c = kst::random_controls(rng, s);
  const auto st = solve_forward(s, c);
  SpaceTimeField r1(s.tg.steps(), s.sg.cells()), r2 = r1;
  for (double& x : r1.values()) x = kst::uniform(rng, -1, 1);
  for (double& x : r2.values()) x = kst::uniform(rng, -1, 1);
  auto with_residual = [&](const SpaceTimeField& r) {
    ProblemSetup t = s;
    for (std::size_t n = 1; n <= s.tg.steps(); ++n)
      for (std::size_t j = 0; j < s.sg.cells(); ++j) t.u_d(n - 1, j) = st.u(n, j) - r(n - 1, j);
    return solve_backward(t, c, st);
  };
  SpaceTimeField r12 = r1;
  r12 += r2;
  const auto a1 = with_residual(r1), a2 = with_residual(r2), a12 = with_residual(r12);
  for (std::size_t i = 0; i < a12.phi.values().size(); ++i) {
    EXPECT_NEAR(a12.phi.values()[i], a1.phi.values()[i] + a2.phi.values()[i], 1e-10);
    EXPECT_NEAR(a12.psi.values()[i], a1.psi.values()[i] + a2.psi.values()[i], 1e-10);
  }
}

class DenseTranspose : public ::testing::TestWithParam<BoundaryControlKind> {};

// Every gradient entry equals the tangent response to the matching unit
// direction, which makes the backward sweep the transpose of the tangent map.
TEST_P(DenseTranspose, GradientEntriesMatchUnitTangents) {
  std::mt19937_64 rng(31 + static_cast<int>(GetParam()));
  for (int trial = 0; trial < 3; ++trial) {
    kst::RandomSetupOptions o;
    o.cells = 5 + trial;
    o.steps = 3 + trial;
    o.bkind = GetParam();
    o.alpha_f = 0.5;
    o.alpha_g = 0.25;
    const auto s = kst::random_setup(rng, o);
    const auto c = kst::random_controls(rng, s);
    const auto e = evaluate(s, c);
    const double dtdx = s.tg.dt() * s.sg.dx();
    for (std::size_t r = 0; r < s.tg.steps(); ++r) {
      for (std::size_t j = 0; j < s.sg.cells(); ++j) {
        if (!s.omega_c.member[j]) continue;
        auto d = ControlPair::zeros(s);
        d.f(r, j) = 1.0;
        const double tangent = directional_derivative_via_sensitivity(s, c, e.states, d);
        EXPECT_NEAR(e.gradient.wrt_f(r, j) * dtdx, tangent, 1e-12 * (std::abs(tangent) + dtdx)) << r << "," << j;
      }
      for (Side side : {Side::left, Side::right}) {
        if (!s.boundary_active(side)) continue;
        auto d = ControlPair::zeros(s);
        d.g.at(r, side) = 1.0;
        const double tangent = directional_derivative_via_sensitivity(s, c, e.states, d);
        EXPECT_NEAR(e.gradient.wrt_g.at(r, side) * s.tg.dt(), tangent, 1e-12 * (std::abs(tangent) + s.tg.dt()));
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Kinds, DenseTranspose,
                         ::testing::Values(BoundaryControlKind::robin, BoundaryControlKind::bilinear));

TEST(SolveBackward, TerminalRowIsZero) {
  std::mt19937_64 rng(2);
  const auto s = kst::random_setup(rng, {});
  const auto c = kst::random_controls(rng, s);
  const auto adj = solve_backward(s, c, solve_forward(s, c));
  ASSERT_EQ(adj.phi.rows(), s.tg.steps() + 1);
  for (double x : adj.phi.row(s.tg.steps())) EXPECT_EQ(x, 0.0);
  for (double x : adj.psi.row(s.tg.steps())) EXPECT_EQ(x, 0.0);
}

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "kscontrol/adam.hpp"
#include "test_support.hpp"

using namespace kscontrol;

namespace {

ProblemSetup small_setup(BoundaryControlKind kind) {
  auto s = kst::uniform_setup(4, 3, 0.1, 1.0, 1.0, 1.0);
  s.bkind = kind;
  s.bmask = {true, true};
  return s;
}

ControlGradient filled(const ProblemSetup& s, double fval, double gval) {
  ControlGradient g{SpaceTimeField(s.tg.steps(), s.sg.cells(), fval), BoundarySignal(s.tg.steps(), gval)};
  return g;
}

}  // namespace

TEST(AdamStep, ZeroGradientIsAFixedPoint) {
  const auto s = small_setup(BoundaryControlKind::bilinear);
  ControlPair c = ControlPair::zeros(s);
  c.f(1, 2) = 0.3;
  c.g.at(0, Side::left) = -0.4;
  const auto [state, next] = adam_step(AdamState::zeros(s), filled(s, 0, 0), c, AdamConfig{}, s.bkind);
  EXPECT_EQ(next, c);
  for (double x : state.m.wrt_f.values()) EXPECT_EQ(x, 0.0);
  for (double x : state.z.wrt_f.values()) EXPECT_EQ(x, 0.0);
  EXPECT_EQ(state.k, 1);
}

TEST(AdamStep, FirstStepIsSignNormalized) {
  const auto s = small_setup(BoundaryControlKind::bilinear);
  const auto [state, next] = adam_step(AdamState::zeros(s), filled(s, 2.0, -2.0), ControlPair::zeros(s), AdamConfig{},
                                       s.bkind);
  const double step = 0.1 * 2.0 / std::sqrt(4.0 + 1e-8);
  for (double x : next.f.values()) EXPECT_NEAR(x, -step, 1e-15);
  for (double x : next.g.table().values()) EXPECT_NEAR(x, step, 1e-15);
  EXPECT_NEAR(step, 0.1, 1e-9);
  for (double x : state.m.wrt_f.values()) EXPECT_NEAR(x, 0.2, 1e-15);
  for (double x : state.z.wrt_f.values()) EXPECT_NEAR(x, 0.004, 1e-15);
}

TEST(AdamStep, SecondStepClosedForm) {
  const auto s = small_setup(BoundaryControlKind::none);
  AdamConfig cfg;
  auto [st1, c1] = adam_step(AdamState::zeros(s), filled(s, 1.0, 0.0), ControlPair::zeros(s), cfg, s.bkind);
  auto [st2, c2] = adam_step(st1, filled(s, -3.0, 0.0), c1, cfg, s.bkind);
  const double m = 0.9 * 0.1 + 0.1 * -3.0;
  const double z = 0.999 * 0.001 + 0.001 * 9.0;
  const double mh = m / (1 - 0.81), zh = z / (1 - 0.999 * 0.999);
  const double expected = -0.1 / std::sqrt(1.0 + 1e-8) - 0.1 * mh / std::sqrt(zh + 1e-8);
  for (double x : c2.f.values()) EXPECT_NEAR(x, expected, 1e-14);
  EXPECT_EQ(st2.k, 2);
}

TEST(AdamStep, RobinProjectionClipsAtZero) {
  const auto s = small_setup(BoundaryControlKind::robin);
  ControlPair c = ControlPair::zeros(s);
  for (double& x : c.g.table().values()) x = -0.3 + 0.1 * 2.0 / std::sqrt(4.0 + 1e-8);  // lands on -0.3 before clipping
  const auto [state, next] = adam_step(AdamState::zeros(s), filled(s, 0.0, 2.0), c, AdamConfig{}, s.bkind);
  for (double x : next.g.table().values()) EXPECT_EQ(x, 0.0);

  const auto b = small_setup(BoundaryControlKind::bilinear);
  const auto [bs, bnext] = adam_step(AdamState::zeros(b), filled(b, 0.0, 2.0), c, AdamConfig{}, b.bkind);
  for (double x : bnext.g.table().values()) EXPECT_NEAR(x, -0.3, 1e-12);
}

TEST(AdamConfig, Validation) {
  EXPECT_NO_THROW(validate(AdamConfig{}));
  AdamConfig c;
  c.beta1 = 1.0;
  EXPECT_THROW(validate(c), ValidationError);
  c = {};
  c.alpha = 0.0;
  EXPECT_THROW(validate(c), ValidationError);
  c = {};
  c.max_iter = 0;
  EXPECT_THROW(validate(c), ValidationError);
}

TEST(Optimize, AlreadyOptimalStopsAtOnce) {
  auto s = kst::uniform_setup(8, 6, 0.1, 1.0, 1.0, 1.0);
  s.phys.lambda = s.phys.mu = 1.0;
  const auto r = optimize(s, AdamConfig{}, ControlPair::zeros(s));
  ASSERT_EQ(r.trace.iterations(), 1u);
  EXPECT_EQ(r.trace.termination, Termination::tolerance);
  EXPECT_LT(r.trace.grad_norm_l2[0], 1e-14);
  EXPECT_LT(r.trace.cost[0], 1e-28);
}

TEST(Optimize, TraceShapesAndBestIterate) {
  std::mt19937_64 rng(77);
  kst::RandomSetupOptions o;
  o.bkind = BoundaryControlKind::bilinear;
  const auto s = kst::random_setup(rng, o);
  AdamConfig cfg;
  cfg.max_iter = 40;
  cfg.alpha = 0.5;
  const auto r = optimize(s, cfg, ControlPair::zeros(s));
  const auto& t = r.trace;
  ASSERT_EQ(t.iterations(), 40u);
  EXPECT_EQ(t.termination, Termination::max_iter);
  EXPECT_EQ(t.grad_norm_l2.size(), 40u);
  EXPECT_EQ(t.grad_norm_max.size(), 40u);
  EXPECT_EQ(t.wall_ms.size(), 40u);
  EXPECT_EQ(t.kink_entries.size(), 40u);
  for (double c : t.cost) EXPECT_GE(c, t.cost[t.best_iter - 1]);
  EXPECT_EQ(reduced_cost(s, r.best), t.cost[t.best_iter - 1]);
  EXPECT_EQ(reduced_cost(s, r.last), t.cost.back());
  EXPECT_LT(t.cost[t.best_iter - 1], t.cost[0]);
  // the zero initial guess sits on every kink
  EXPECT_EQ(t.kink_entries[0], s.omega_c.count() * s.tg.steps() + s.bmask.count() * s.tg.steps());
}

TEST(Optimize, RobinControlsStayNonnegative) {
  std::mt19937_64 rng(78);
  kst::RandomSetupOptions o;
  o.bkind = BoundaryControlKind::robin;
  o.random_regions = false;
  auto s = kst::random_setup(rng, o);
  for (double& x : s.u_d.values()) x = 0.0;  // pushes toward withdrawing chemical
  AdamConfig cfg;
  cfg.max_iter = 60;
  const auto r = optimize(s, cfg, ControlPair::zeros(s));
  for (double g : r.last.g.table().values()) EXPECT_GE(g, 0.0);
  for (double g : r.best.g.table().values()) EXPECT_GE(g, 0.0);
}

TEST(Optimize, Deterministic) {
  std::mt19937_64 rng(79);
  const auto s = kst::random_setup(rng, {});
  AdamConfig cfg;
  cfg.max_iter = 15;
  const auto a = optimize(s, cfg, ControlPair::zeros(s));
  const auto b = optimize(s, cfg, ControlPair::zeros(s));
  EXPECT_EQ(a.trace.cost, b.trace.cost);
  EXPECT_EQ(a.best, b.best);
}

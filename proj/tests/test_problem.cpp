#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "kscontrol/problem.hpp"
#include "test_support.hpp"

using namespace kscontrol;

namespace {

ProblemSetup reference_setup() {
  ProblemSetup s = kst::uniform_setup(100, 100, 0.05, 1.0, 3.0, 1.0);
  using std::numbers::pi;
  s.u0 = cell_averages([](double x) { return 1.0 + std::cos(pi * x); }, s.sg);
  s.v0 = cell_averages([](double x) { return 3.0 + std::cos(pi * x); }, s.sg);
  return s;
}

ErrorCode code_of(const ProblemSetup& s) {
  try {
    validate(s);
  } catch (const ValidationError& e) {
    return e.code();
  }
  ADD_FAILURE() << "setup was accepted";
  return ErrorCode::config_parse;
}

}  // namespace

TEST(Validate, ReferenceSetupAcceptedAndUnchanged) {
  const ProblemSetup s = reference_setup();
  const ProblemSetup& out = validate(s);
  EXPECT_EQ(&out, &s);
  EXPECT_NO_THROW(validate(validate(s)));
  EXPECT_DOUBLE_EQ(s.phys.Du, 0.1);
  EXPECT_DOUBLE_EQ(s.phys.chi, 1.0);
  EXPECT_DOUBLE_EQ(s.phys.Dv, 0.1);
  EXPECT_DOUBLE_EQ(s.phys.lambda, 0.1);
  EXPECT_DOUBLE_EQ(s.phys.mu, 1.0);
}

TEST(Validate, NegativeInitialCells) {
  ProblemSetup s = reference_setup();
  s.u0[17] = -0.1;
  try {
    validate(s);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.code(), ErrorCode::negative_initial_cells);
    EXPECT_STREQ(e.what(), "negative initial cell density");
  }
}

TEST(Validate, RobinNeedsPositivePermeability) {
  ProblemSetup s = reference_setup();
  s.bkind = BoundaryControlKind::robin;
  s.bmask = {true, true};
  s.phys.sigma = 0.0;
  try {
    validate(s);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.code(), ErrorCode::non_positive_permeability);
    EXPECT_STREQ(e.what(), "permeability must be positive");
  }
  s.bkind = BoundaryControlKind::bilinear;
  EXPECT_NO_THROW(validate(s));
}

TEST(Validate, EachInvariantHasItsOwnCode) {
  {
    auto s = reference_setup();
    s.v0[0] = -1.0;
    EXPECT_EQ(code_of(s), ErrorCode::negative_initial_chemical);
  }
  {
    auto s = reference_setup();
    s.phys.Du = 0.0;
    EXPECT_EQ(code_of(s), ErrorCode::non_positive_diffusion);
  }
  {
    auto s = reference_setup();
    s.phys.lambda = -0.5;
    EXPECT_EQ(code_of(s), ErrorCode::negative_reaction_rate);
  }
  {
    auto s = reference_setup();
    s.weights.alpha_g = -1.0;
    EXPECT_EQ(code_of(s), ErrorCode::negative_weight);
  }
  {
    auto s = reference_setup();
    s.omega_o = RegionMask::none(s.sg);
    EXPECT_EQ(code_of(s), ErrorCode::empty_observation_region);
  }
  {
    auto s = reference_setup();
    s.bkind = BoundaryControlKind::bilinear;
    s.bmask = {false, false};
    EXPECT_EQ(code_of(s), ErrorCode::missing_boundary_endpoint);
  }
  {
    auto s = reference_setup();
    s.u_d = SpaceTimeField(99, 100);
    EXPECT_EQ(code_of(s), ErrorCode::shape_mismatch);
  }
  {
    auto s = reference_setup();
    s.u0[3] = NAN;
    EXPECT_EQ(code_of(s), ErrorCode::non_finite_value);
  }
}

TEST(Validate, EmptyControlRegionMeansNoDistributedControl) {
  auto s = reference_setup();
  s.omega_c = RegionMask::none(s.sg);
  EXPECT_NO_THROW(validate(s));
}

TEST(ControlPair, RestrictionZeroesInactiveEntries) {
  auto s = reference_setup();
  s.omega_c = interval_to_mask(-0.5, 0.5, s.sg);
  s.bkind = BoundaryControlKind::bilinear;
  s.bmask = {false, true};
  ControlPair c = ControlPair::zeros(s);
  for (double& x : c.f.values()) x = 1.0;
  for (double& x : c.g.table().values()) x = 1.0;
  c.restrict_to(s);
  EXPECT_EQ(c.f(0, 0), 0.0);
  EXPECT_EQ(c.f(0, 50), 1.0);
  EXPECT_EQ(c.g.at(3, Side::left), 0.0);
  EXPECT_EQ(c.g.at(3, Side::right), 1.0);
}

TEST(CheckControls, ShapeAndFiniteness) {
  auto s = reference_setup();
  ControlPair c = ControlPair::zeros(s);
  EXPECT_NO_THROW(check_controls(s, c));
  c.f(2, 2) = NAN;
  EXPECT_THROW(check_controls(s, c), ValidationError);
  ControlPair bad{SpaceTimeField(5, 100), BoundarySignal(100)};
  EXPECT_THROW(check_controls(s, bad), ValidationError);
}

TEST(BoundaryKind, ParseRoundTrip) {
  for (auto k : {BoundaryControlKind::none, BoundaryControlKind::robin, BoundaryControlKind::bilinear})
    EXPECT_EQ(parse_boundary_kind(to_string(k)), k);
  EXPECT_THROW(parse_boundary_kind("dirichlet"), ValidationError);
}

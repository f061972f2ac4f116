#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "kscontrol/discretization.hpp"

using namespace kscontrol;

TEST(BuildGrids, ReferenceResolution) {
  const auto [sg, tg] = build_grids(1.0, 100, 0.05, 100);
  EXPECT_DOUBLE_EQ(sg.dx(), 0.02);
  EXPECT_DOUBLE_EQ(tg.dt(), 0.0005);
  EXPECT_EQ(sg.cells(), 100u);
  EXPECT_EQ(tg.steps(), 100u);
}

TEST(BuildGrids, SmallestAndArithmetic) {
  auto [a, b] = build_grids(1.0, 2, 1.0, 1);
  EXPECT_DOUBLE_EQ(a.dx(), 1.0);
  EXPECT_DOUBLE_EQ(b.dt(), 1.0);
  auto [c, d] = build_grids(0.5, 4, 2.0, 8);
  EXPECT_DOUBLE_EQ(c.dx(), 0.25);
  EXPECT_DOUBLE_EQ(d.dt(), 0.25);
}

TEST(BuildGrids, RejectsDegenerateInput) {
  EXPECT_THROW(build_grids(0.0, 10, 1.0, 10), ValidationError);
  EXPECT_THROW(build_grids(1.0, 1, 1.0, 10), ValidationError);
  EXPECT_THROW(build_grids(1.0, 10, -1.0, 10), ValidationError);
  EXPECT_THROW(build_grids(1.0, 10, 1.0, 0), ValidationError);
  EXPECT_THROW(build_grids(std::nan(""), 10, 1.0, 10), ValidationError);
}

TEST(SpatialGrid, CentersTileTheDomain) {
  const SpatialGrid sg(1.0, 4);
  const auto c = sg.centers();
  ASSERT_EQ(c.size(), 4u);
  EXPECT_DOUBLE_EQ(c[0], -0.75);
  EXPECT_DOUBLE_EQ(c[3], 0.75);
  EXPECT_DOUBLE_EQ(sg.length(), 2.0);
}

TEST(CellAverages, Examples) {
  const SpatialGrid four(1.0, 4);
  for (double x : cell_averages([](double) { return 1.0; }, four)) EXPECT_EQ(x, 1.0);
  const auto lin = cell_averages([](double x) { return x; }, four);
  EXPECT_DOUBLE_EQ(lin[0], -0.75);
  EXPECT_DOUBLE_EQ(lin[1], -0.25);
  EXPECT_DOUBLE_EQ(lin[2], 0.25);
  EXPECT_DOUBLE_EQ(lin[3], 0.75);

  const auto cosine =
      cell_averages([](double x) { return 1.0 + std::cos(std::numbers::pi * x); }, SpatialGrid(1.0, 2));
  EXPECT_NEAR(cosine[0], 1.0, 1e-15);
  EXPECT_NEAR(cosine[1], 1.0, 1e-15);
}

TEST(CellAverages, NonFiniteSampleNamesTheCell) {
  try {
    cell_averages([](double x) { return x > 0.5 ? INFINITY : 0.0; }, SpatialGrid(1.0, 4));
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.code(), ErrorCode::non_finite_value);
    EXPECT_NE(std::string(e.what()).find("cell 4"), std::string::npos);
  }
}

TEST(IntervalToMask, WholeHalfAndRightPart) {
  const SpatialGrid sg(1.0, 100);
  const auto whole = interval_to_mask(-1, 1, sg);
  EXPECT_EQ(whole.count(), 100u);
  EXPECT_NEAR(whole.measure, 2.0, 1e-12);

  const auto half = interval_to_mask(-0.5, 0.5, sg);
  EXPECT_EQ(half.count(), 50u);
  EXPECT_NEAR(half.measure, 1.0, 1e-12);
  for (std::size_t j = 0; j < 100; ++j) EXPECT_EQ(bool(half.member[j]), j >= 25 && j <= 74) << j;

  const auto right = interval_to_mask(0.2, 1, sg);
  EXPECT_EQ(right.count(), 40u);
  EXPECT_NEAR(right.measure, 0.8, 1e-12);
  for (std::size_t j = 0; j < 100; ++j) EXPECT_EQ(bool(right.member[j]), j >= 60) << j;
}

TEST(IntervalToMask, EmptyOrInvertedIsRejected) {
  const SpatialGrid sg(1.0, 4);
  EXPECT_THROW(interval_to_mask(0.5, 0.4, sg), ValidationError);
  EXPECT_THROW(interval_to_mask(0.0, 0.1, sg), ValidationError);
}

TEST(InnerProduct, Examples) {
  const auto [sg, tg] = build_grids(1.0, 10, 0.05, 7);
  SpaceTimeField ones(7, 10, 1.0), zero(7, 10), a(7, 10);
  EXPECT_NEAR(inner_product(ones, ones, tg, sg), 0.1, 1e-15);
  for (std::size_t i = 0; i < a.values().size(); ++i) a.values()[i] = std::sin(double(i));
  EXPECT_EQ(inner_product(a, zero, tg, sg), 0.0);
  SpaceTimeField single(7, 10);
  single(3, 4) = 2.5;
  EXPECT_DOUBLE_EQ(inner_product(single, single, tg, sg), tg.dt() * sg.dx() * 6.25);
  EXPECT_THROW(inner_product(ones, SpaceTimeField(6, 10), tg, sg), ValidationError);
}

TEST(BoundaryInnerProduct, MaskedEndpointsOnly) {
  const TimeGrid tg(1.0, 4);
  BoundarySignal a(4, 1.0), b(4, 2.0);
  EXPECT_DOUBLE_EQ(boundary_inner_product(a, b, tg, {true, true}), 4.0);
  EXPECT_DOUBLE_EQ(boundary_inner_product(a, b, tg, {true, false}), 2.0);
  EXPECT_DOUBLE_EQ(boundary_inner_product(a, b, tg, {false, false}), 0.0);
}

TEST(Splitting, PartsAndHeaviside) {
  for (double a : {-2.0, -0.0, 0.0, 3.5}) EXPECT_EQ(positive_part(a) + negative_part(a), a);
  EXPECT_EQ(heaviside(0.0), 0.5);
  EXPECT_EQ(heaviside(1e-300), 1.0);
  EXPECT_EQ(heaviside(-1e-300), 0.0);
}

TEST(SpaceTimeField, ArithmeticAndShapes) {
  SpaceTimeField a(2, 3, 1.0), b(2, 3, 2.0);
  a += b;
  a *= 2.0;
  a.axpy(-1.0, b);
  for (double x : a.values()) EXPECT_EQ(x, 4.0);
  EXPECT_THROW(a += SpaceTimeField(3, 2), ValidationError);
  a(1, 2) = NAN;
  EXPECT_FALSE(a.all_finite());
}

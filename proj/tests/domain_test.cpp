#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nlspec/domain.hpp"
#include "oracles.hpp"

using namespace nlspec;

TEST(Domain, ClosedFormMeasures) {
  EXPECT_DOUBLE_EQ(DomainSpec::unit_square().measure(), 1.0);
  EXPECT_DOUBLE_EQ(DomainSpec::interval(0.25, 1.0).measure(), 0.75);
  EXPECT_NEAR(DomainSpec::ball({0.0, 0.0}, 1.0).measure(), std::numbers::pi, 1e-14);
  EXPECT_DOUBLE_EQ(DomainSpec::ball({0.0, 0.0}, 0.5, 1).measure(), 1.0);
  EXPECT_NEAR(DomainSpec::union_of_balls({{{-2.0, 0.0}, 1.0}, {{2.0, 0.0}, 1.0}}).measure(), 2.0 * std::numbers::pi,
              1e-13);
  EXPECT_DOUBLE_EQ(DomainSpec::polygon({{0.0, 0.0}, {2.0, 0.0}, {0.0, 1.0}}).measure(), 1.0);
  EXPECT_NEAR(DomainSpec::rough(3).measure(), 1.0, 1e-12);
}

TEST(Domain, OpenSetMembership) {
  const auto sq = DomainSpec::unit_square();
  EXPECT_TRUE(sq.contains({0.5, 0.5}));
  EXPECT_FALSE(sq.contains({0.0, 0.5}));
  EXPECT_FALSE(sq.contains({1.0, 1.0}));
  const auto b = DomainSpec::ball({0.0, 0.0}, 1.0);
  EXPECT_TRUE(b.contains({0.6, 0.79}));
  EXPECT_FALSE(b.contains({0.6, 0.8}));
  const auto r = DomainSpec::rough(2);
  EXPECT_TRUE(r.contains({0.125, 1.4}));   // crest at 1 + 1/2
  EXPECT_FALSE(r.contains({0.375, 0.6}));  // trough at 1 - 1/2
}

TEST(Domain, RoughSymmetricDifferenceAgainstQuadrature) {
  const auto sq = DomainSpec::unit_square();
  for (int n : {2, 4, 8, 16, 32}) {
    const double q = oracle::gauss([n](double x) { return std::fabs(std::sin(2.0 * std::numbers::pi * n * x)) / n; },
                                   0.0, 1.0, 64 * n);
    const auto s = symmetric_difference(DomainSpec::rough(n), sq);
    EXPECT_TRUE(s.closed_form);
    EXPECT_NEAR(s.value, q, 1e-12);
    EXPECT_NEAR(s.value, 2.0 / (std::numbers::pi * n), 1e-15);
    EXPECT_NEAR(s.subcell_estimate, q, 1e-3);
    EXPECT_FALSE(s.flagged);
  }
}

TEST(Domain, SymmetricDifferenceOfShiftedIntervals) {
  const auto a = DomainSpec::interval(0.0, 1.0);
  const auto b = DomainSpec::interval(0.0, 0.95);
  EXPECT_NEAR(symmetric_difference_measure(a, b), 0.05, 1e-15);
  EXPECT_EQ(symmetric_difference_measure(a, a), 0.0);
}

TEST(Domain, SubcellEstimateForOffsetDisks) {
  const auto a = DomainSpec::ball({0.0, 0.0}, 1.0);
  const auto b = DomainSpec::ball({0.5, 0.0}, 1.0);
  // lens area of two unit disks at distance d
  const double d = 0.5;
  const double lens = 2.0 * std::acos(d / 2.0) - 0.5 * d * std::sqrt(4.0 - d * d);
  const auto s = symmetric_difference(a, b);
  EXPECT_FALSE(s.closed_form);
  EXPECT_NEAR(s.value, 2.0 * (std::numbers::pi - lens), 2e-3);
}

TEST(Domain, PerforatedSolidFraction) {
  PerforatedShape p;
  p.base = Box{{0.0, 0.0}, {1.0, 1.0}};
  p.eps = 0.25;
  p.hole_fraction = 0.25;
  const auto d = DomainSpec::perforated(p);
  EXPECT_NEAR(d.measure(), 0.75, 1e-12);
  EXPECT_FALSE(d.contains({0.125, 0.125}));  // cell centre is in the hole
  EXPECT_TRUE(d.contains({0.01, 0.01}));
}

TEST(Domain, MappedMeasureIsJacobianWeighted) {
  const auto m = DomainSpec::mapped(DomainSpec::unit_square(), MapSpec::affine_diagonal({2.0, 0.5}));
  EXPECT_NEAR(m.measure(), 1.0, 1e-12);
  EXPECT_TRUE(m.contains({1.9, 0.45}));
  EXPECT_FALSE(m.contains({0.5, 0.6}));
  const auto dil = DomainSpec::mapped(DomainSpec::ball({0.0, 0.0}, 1.0), MapSpec::dilation(1.5));
  EXPECT_NEAR(dil.measure(), 2.25 * std::numbers::pi, 1e-3);
}

TEST(Domain, BallOfSameMeasure) {
  const auto b = ball_of_same_measure(DomainSpec::box({0.0, 0.0}, {4.0, 0.25}));
  EXPECT_NEAR(b.measure(), 1.0, 1e-14);
}

TEST(Domain, PreconditionsNameTheInvariant) {
  try {
    DomainSpec::union_of_balls({{{0.0, 0.0}, 1.0}, {{1.5, 0.0}, 1.0}});
    FAIL() << "overlapping balls accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.module(), "domain");
    EXPECT_EQ(e.invariant(), "disjoint_balls");
  }
  EXPECT_THROW(DomainSpec::ball({0.0, 0.0}, 0.0), Error);
  EXPECT_THROW(DomainSpec::rough(0), Error);
  EXPECT_THROW(DomainSpec::polygon({{0.0, 0.0}, {1.0, 0.0}}), Error);
  EXPECT_THROW(symmetric_difference(DomainSpec::interval(0, 1), DomainSpec::unit_square()), Error);
}

TEST(Domain, BoundaryQuadratureOfCircle) {
  const auto q = boundary_quadrature(DomainSpec::ball({0.0, 0.0}, 2.0), 512);
  double len = 0.0;
  for (const auto& s : q.samples) {
    len += s.weight;
    EXPECT_NEAR(norm(s.normal), 1.0, 1e-14);
    EXPECT_NEAR(dot(s.normal, s.x), 2.0, 1e-12);
  }
  EXPECT_NEAR(len, 4.0 * std::numbers::pi, 1e-12);
  EXPECT_TRUE(q.c1);
  EXPECT_FALSE(boundary_quadrature(DomainSpec::unit_square(), 64).c1);
}

TEST(Domain, KeysIdentifySets) {
  EXPECT_EQ(DomainSpec::unit_square().key(), DomainSpec::box({0, 0}, {1, 1}).key());
  EXPECT_NE(DomainSpec::rough(2).key(), DomainSpec::rough(4).key());
}

#include <gtest/gtest.h>

#include <cmath>

#include "nlspec/experiments.hpp"
#include "oracles.hpp"

using namespace nlspec;

namespace {
bool all_passed(const std::vector<Check>& cs) {
  for (const auto& c : cs)
    if (!c.passed) {
      ADD_FAILURE() << c.module << ": " << c.name << ": " << c.detail;
      return false;
    }
  return true;
}
}  // namespace

TEST(Variational, SeededTrialsStayAboveLambda1) {
  const KernelSpec k = make_kernel(KernelFamily::bump, 0.3, 2);
  const auto d = DomainSpec::unit_square();
  const auto op = assemble(k, d, GridSpec(1.0 / 16).cover({d}));
  const Spectrum s = eigendecompose(op);
  const auto r = variational_check(op, s, 100, 7);
  EXPECT_EQ(r.trials, 100);
  EXPECT_GE(r.min_excess, -1e-10);
  EXPECT_LE(r.eigenvector_residual, 1e-10);
  EXPECT_TRUE(all_passed(r.checks));
  const auto again = variational_check(op, s, 100, 7);
  EXPECT_EQ(again.min_rayleigh, r.min_rayleigh);
}

TEST(Convergence, IntervalCauchyDifferencesShrink) {
  const KernelSpec k = make_kernel(KernelFamily::bump, 0.3, 1);
  const auto r = grid_convergence(k, DomainSpec::interval(0.0, 1.0), {1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256});
  ASSERT_EQ(r.diffs.size(), 3u);
  EXPECT_GT(r.diffs[0], r.diffs[1]);
  EXPECT_GT(r.diffs[1], r.diffs[2]);
  for (std::size_t i = 0; i < r.orders.size(); ++i)
    EXPECT_NEAR(r.orders[i], std::log(r.diffs[i] / r.diffs[i + 1]) / std::log(2.0), 1e-12);
}

TEST(Continuity, ShrinkingIntervalsAndWeyl) {
  const KernelSpec k = make_kernel(KernelFamily::bump, 0.3, 1);
  const auto limit = DomainSpec::interval(0.0, 1.0);
  std::vector<DomainSpec> fam;
  std::vector<std::string> labels;
  for (double s : {0.25, 0.125, 0.0625}) {
    fam.push_back(DomainSpec::interval(0.0, 1.0 - s));
    labels.push_back("s=" + std::to_string(s));
  }
  const auto r = continuity_sweep(k, limit, fam, labels, 2, GridSpec(1.0 / 128), "shrink");
  EXPECT_TRUE(all_passed(r.checks));
  for (std::size_t i = 1; i < r.members.size(); ++i)
    EXPECT_LT(r.members[i].lambda1_distance, r.members[i - 1].lambda1_distance);
  for (const auto& m : r.members) {
    EXPECT_LE(m.lambda1_distance, m.norm_diff + 1e-14);
    EXPECT_LE(m.norm_diff, m.bound);
  }
}

TEST(FaberKrahn, BallBeatsSquareAtEqualMeasure) {
  const KernelSpec k = make_kernel(KernelFamily::bump, 0.3, 2);
  const auto r = faber_krahn_check(k, {DomainSpec::unit_square()}, {"square"}, GridSpec(1.0 / 16), true);
  EXPECT_LT(r.ball.lambda1, r.candidates[0].lambda1);
  EXPECT_NEAR(r.ball.measure, 1.0, 1e-12);
}

TEST(FaberKrahn, UnequalMeasureRejected) {
  const KernelSpec k = make_kernel(KernelFamily::bump, 0.3, 2);
  try {
    faber_krahn_check(k, {DomainSpec::unit_square(), DomainSpec::box({0, 0}, {2, 1})}, {"a", "b"}, GridSpec(0.25), false);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.invariant(), "equal_measure");
  }
}

TEST(TwoBalls, FarApartBallsDecoupleExactly) {
  const KernelSpec k = make_kernel(KernelFamily::bump, 0.3, 2);
  const auto r = hong_krahn_szego_check(k, 0.5, {0.45, 1.2}, GridSpec(1.0 / 16));
  EXPECT_TRUE(all_passed(r.checks));
  for (const auto& row : r.rows) {
    EXPECT_TRUE(row.decoupled);
    EXPECT_LT(row.pair_gap, 1e-9);
    EXPECT_GE(row.separation, row.requested_separation);
  }
  EXPECT_LT(r.lambda2_double_ball, r.rows.front().lambda2 + 1.0);
}

TEST(Perforated, ZeroHoleFractionIsTheSolidDomain) {
  const KernelSpec k = make_kernel(KernelFamily::bump, 0.3, 2);
  const auto r = perforated_limit(k, Box{{0, 0}, {1, 1}}, 0.0, HoleShape::box, {0.5, 0.25}, GridSpec(1.0 / 16));
  for (double l : r.lambda1_eps) EXPECT_EQ(l, r.lambda1_solid);
}

TEST(Perforated, ScalesMustAlignWithGrid) {
  const KernelSpec k = make_kernel(KernelFamily::bump, 0.3, 2);
  EXPECT_THROW(perforated_limit(k, Box{{0, 0}, {1, 1}}, 0.25, HoleShape::box, {0.3, 0.15}, GridSpec(1.0 / 16)), Error);
  EXPECT_THROW(perforated_limit(k, Box{{0, 0}, {1, 1}}, 0.25, HoleShape::box, {0.25, 0.5}, GridSpec(1.0 / 16)), Error);
}

TEST(Stretch, ThinRectanglesHaveLargerLambda1) {
  const KernelSpec k = make_kernel(KernelFamily::bump, 0.3, 2);
  const auto r = stretch_sweep(k, DomainSpec::unit_square(), {1.0, 0.5}, GridSpec(1.0 / 16), 0.0);
  EXPECT_TRUE(all_passed(r.checks));
  EXPECT_GT(r.rows[1].lambda1, r.rows[0].lambda1);
}

#include <gtest/gtest.h>

#include <cmath>

#include "nlspec/shape.hpp"
#include "oracles.hpp"

using namespace nlspec;

namespace {
// mu_1 of the pulled-back operator for h(x) = (1 + t) x on (0, 1), built
// directly: P(i, j) = J((1 + t)(x_i - x_j)) (1 + t) h.
double dilated_mu1(double width, int n, double t) {
  const KernelSpec k = make_kernel(KernelFamily::bump, width, 1);
  const double h = 1.0 / n;
  oracle::Dense p(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      p[i][j] = k.norm_const * oracle::profile("bump", width, (1.0 + t) * std::fabs(i - j) * h) * (1.0 + t) * h;
  return oracle::power_iteration(p).value;
}
}  // namespace

TEST(ShapeDerivative, IntervalDilationAgainstDirectFiniteDifference) {
  const KernelSpec k = make_kernel(KernelFamily::bump, 0.5, 1);
  const auto d = DomainSpec::interval(0.0, 1.0);
  const int n = 256;
  ShapeOptions opt;
  opt.t_fd = {1e-3};
  const auto r = shape_derivative(k, d, 0, VectorField::dilation(), GridSpec(1.0 / n).cover({d}), opt);
  const double t = 1e-3;
  const double fd = -(dilated_mu1(0.5, n, t) - dilated_mu1(0.5, n, -t)) / (2.0 * t);
  EXPECT_NEAR(r.dlambda_fd, fd, 1e-6 * std::fabs(fd));
  EXPECT_NEAR(r.dlambda_formula, fd, 0.02 * std::fabs(fd));
  EXPECT_LT(r.dlambda_formula, 0.0);  // enlarging the domain lowers lambda_1
  EXPECT_NEAR(r.dlambda_formula, -(1.0 - r.lambda0) * r.boundary_integral, 1e-15);
}

TEST(ShapeDerivative, RigidMotionsOfDiskVanish) {
  const KernelSpec k = make_kernel(KernelFamily::bump, 0.5, 2);
  const auto d = DomainSpec::ball({0.0, 0.0}, 1.0);
  const ContainerGrid g = GridSpec(1.0 / 12.0).cover({d});
  for (const auto& v : {VectorField::rotation(), VectorField::constant({1.0, 0.0})}) {
    const auto r = shape_derivative(k, d, 0, v, g);
    EXPECT_LT(std::fabs(r.dlambda_formula), 1e-6) << r.field_name;
    EXPECT_LT(std::fabs(r.dlambda_fd), 1e-6) << r.field_name;
  }
}

TEST(ShapeDerivative, TentKernelRejected) {
  const KernelSpec k = make_kernel(KernelFamily::tent, 0.5, 1);
  const auto d = DomainSpec::interval(0.0, 1.0);
  try {
    shape_derivative(k, d, 0, VectorField::dilation(), GridSpec(1.0 / 32).cover({d}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.invariant(), "kernel_smoothness");
  }
}

TEST(Pullback, WeightedSelfAdjointUnweightedNot) {
  const KernelSpec k = make_kernel(KernelFamily::bump, 0.3, 2);
  const auto d = DomainSpec::unit_square();
  const auto m = MapSpec::perturbation(VectorField::radial_bump({0.5, 0.5}, 0.4), 0.2);
  const PullbackOperator p = pullback_operator(k, d, m, GridSpec(1.0 / 16).cover({d}));
  EXPECT_LT(weighted_selfadjointness_check(p.matrix(), p.weights), 1e-12);
  EXPECT_GT(weighted_selfadjointness_check(p.matrix(), std::vector<double>(p.size(), 1.0)), 1e-6);
}

TEST(Pullback, IdentityMapReproducesOperator) {
  const KernelSpec k = make_kernel(KernelFamily::bump, 0.3, 2);
  const auto d = DomainSpec::unit_square();
  const ContainerGrid g = GridSpec(1.0 / 12).cover({d});
  const PullbackOperator p = pullback_operator(k, d, MapSpec::identity(), g);
  const DiscreteOperator op = assemble(k, d, g);
  const Matrix pm = p.matrix();
  for (std::size_t i = 0; i < op.size(); ++i)
    for (std::size_t j = 0; j < op.size(); ++j) EXPECT_NEAR(pm(i, j), op.K(i, j), 1e-15);
}

TEST(Pullback, AffineSpectrumMatchesDirectAssembly) {
  const KernelSpec k = make_kernel(KernelFamily::bump, 0.3, 2);
  const auto c = compare_pullback_with_image(k, DomainSpec::unit_square(), MapSpec::affine_diagonal({2.0, 0.5}), 1.0 / 16, 3);
  ASSERT_EQ(c.rel_diff.size(), 3u);
  for (double r : c.rel_diff) EXPECT_LT(r, 1e-2);
  EXPECT_LT(c.weighted_residual, 1e-12);
}

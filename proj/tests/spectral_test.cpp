#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "nlspec/spectral.hpp"
#include "oracles.hpp"

using namespace nlspec;

namespace {
oracle::Dense dense(const Matrix& m) {
  oracle::Dense d(m.rows(), std::vector<double>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) d[i][j] = m(i, j);
  return d;
}

DiscreteOperator interval_operator(std::size_t n) {
  const KernelSpec k = make_kernel(KernelFamily::bump, 0.3, 1);
  const auto d = DomainSpec::interval(0.0, 1.0);
  return assemble(k, d, GridSpec(1.0 / static_cast<double>(n)).cover({d}));
}
}  // namespace

TEST(Spectrum, PerronPairMatchesPowerIteration) {
  const auto op = interval_operator(512);
  const Spectrum s = eigendecompose(op);
  const auto pw = oracle::power_iteration(dense(op.K));
  EXPECT_NEAR(s.mu1(), pw.value, 1e-10);
  EXPECT_NEAR(s.lambda1(), 1.0 - pw.value, 1e-10);
  // eigenvector agrees up to the h^{-1/2} normalization
  const double scale = s.vectors[0][0] / pw.vector[0];
  for (std::size_t i = 0; i < op.size(); i += 37) EXPECT_NEAR(s.vectors[0][i], scale * pw.vector[i], 1e-7);
}

TEST(Spectrum, TraceIdentity) {
  const auto op = interval_operator(256);
  const Spectrum s = eigendecompose(op);
  double sum = 0.0;
  for (double m : s.mus) sum += m;
  const double expected = op.kernel.sup_norm() * op.grid_measure();
  EXPECT_LT(std::fabs(sum - expected) / expected, 1e-10);
}

TEST(Spectrum, JacobiAndLapackAgree) {
  const auto op = interval_operator(200);
  SpectralOptions j, l;
  j.method = EigenMethod::jacobi;
  l.method = EigenMethod::lapack;
  j.vectors = l.vectors = 3;
  const Spectrum a = eigendecompose(op, j), b = eigendecompose(op, l);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_NEAR(a.mus[i], b.mus[i], 1e-12);
  for (std::size_t v = 0; v < 3; ++v)
    for (std::size_t i = 0; i < op.size(); ++i) EXPECT_NEAR(a.vectors[v][i], b.vectors[v][i], 1e-8);
}

TEST(Spectrum, StructureOfIntervalSpectrum) {
  const Spectrum s = eigendecompose(interval_operator(256));
  EXPECT_GT(s.mu1(), 0.0);
  EXPECT_GT(s.lambda1(), 0.0);
  EXPECT_LT(s.lambda1(), 1.0);
  for (double x : s.vectors[0]) EXPECT_GT(x, 0.0);
  for (const auto& f : detect_simple_systems(s, 5)) EXPECT_TRUE(f.simple) << f.index;
  for (const auto& c : spectral_structure_checks(s)) EXPECT_TRUE(c.passed) << c.name << " " << c.detail;
  for (std::size_t i = 1; i < s.size(); ++i) EXPECT_GE(std::fabs(s.mus[i - 1]), std::fabs(s.mus[i]));
}

TEST(Spectrum, EigenvectorsOrthonormalInWeightedProduct) {
  const auto op = interval_operator(128);
  SpectralOptions o;
  o.vectors = 5;
  const Spectrum s = eigendecompose(op, o);
  for (std::size_t a = 0; a < 5; ++a)
    for (std::size_t b = 0; b < 5; ++b) EXPECT_NEAR(dot(s.vectors[a], s.vectors[b]) * s.weight, a == b ? 1.0 : 0.0, 1e-12);
}

TEST(Spectrum, RayleighQuotientBoundedByLambda1) {
  const auto op = interval_operator(256);
  const Spectrum s = eigendecompose(op);
  const auto K = dense(op.K);
  std::mt19937_64 rng(20240101);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> v(op.size());
    for (auto& x : v) x = u(rng);
    const auto kv = oracle::matvec(K, v);
    double vv = 0.0, vkv = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      vv += v[i] * v[i];
      vkv += v[i] * kv[i];
    }
    const double r = (vv - vkv) / vv;
    EXPECT_NEAR(rayleigh_lambda1(op, v), r, 1e-13);
    EXPECT_GE(r, s.lambda1() - 1e-10);
  }
  EXPECT_NEAR(rayleigh_lambda1(op, s.vectors[0]), s.lambda1(), 1e-10);
}

TEST(Spectrum, DisconnectedUnionHasDoubleEigenvalue) {
  const KernelSpec k = make_kernel(KernelFamily::bump, 0.3, 1);
  const auto d = DomainSpec::union_of_balls({{{0.5, 0.0}, 0.5}, {{2.5, 0.0}, 0.5}}, 1);
  const auto op = assemble(k, d, GridSpec(1.0 / 64.0).cover({d}));
  const Spectrum s = eigendecompose(op);
  EXPECT_NEAR(s.mus[0], s.mus[1], 1e-12);
  EXPECT_FALSE(s.simple[0]);
}

TEST(Spectrum, RejectsZeroVector) {
  const auto op = interval_operator(16);
  EXPECT_THROW(rayleigh_lambda1(op, std::vector<double>(op.size(), 0.0)), Error);
}

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <iterator>
#include <string>
#include <fstream>
#include <memory>

#include "nlspec/operator.hpp"
#include "oracles.hpp"

using namespace nlspec;

TEST(Grid, LatticeAlignedCover) {
  const GridSpec g(1.0 / 8.0, 2);
  const ContainerGrid c = g.cover({DomainSpec::unit_square()});
  EXPECT_EQ(c.size(), static_cast<std::size_t>(12 * 12));
  const Point p = c.node(0);
  EXPECT_DOUBLE_EQ(p[0], -2.0 / 8.0 + 1.0 / 16.0);
  EXPECT_DOUBLE_EQ(c.cell_weight(), 1.0 / 64.0);
  EXPECT_DOUBLE_EQ(g.coarse().h, 0.25);
}

TEST(Assemble, EntriesMatchDirectFormula) {
  const KernelSpec k = make_kernel(KernelFamily::bump, 0.3, 2);
  const auto op = assemble(k, DomainSpec::ball({0.0, 0.0}, 0.5), GridSpec(1.0 / 16.0).cover({DomainSpec::ball({0.0, 0.0}, 0.5)}));
  const auto pts = op.active_nodes();
  const double c = k.norm_const, h2 = 1.0 / 256.0;
  ASSERT_EQ(pts.size(), op.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_LT(pts[i][0] * pts[i][0] + pts[i][1] * pts[i][1], 0.25);
    for (std::size_t j = 0; j < pts.size(); ++j) {
      const double r = std::hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]);
      EXPECT_NEAR(op.K(i, j), c * oracle::profile("bump", 0.3, r) * h2, 1e-15);
    }
  }
}

TEST(Assemble, TraceIsJ0TimesGridMeasure) {
  const KernelSpec k = make_kernel(KernelFamily::gaussian, 0.2, 1);
  const auto d = DomainSpec::interval(0.0, 1.0);
  const auto op = assemble(k, d, GridSpec(1.0 / 100.0).cover({d}));
  EXPECT_EQ(op.size(), 100u);
  EXPECT_NEAR(op.trace(), k.sup_norm() * op.grid_measure(), 1e-13);
}

TEST(Assemble, DimensionMismatchIsAnError) {
  const KernelSpec k = make_kernel(KernelFamily::bump, 0.3, 1);
  const auto d = DomainSpec::unit_square();
  EXPECT_THROW(assemble(k, d, GridSpec(0.25).cover({d})), Error);
}

TEST(NormDiff, MatchesPowerIterationOnDifference) {
  const KernelSpec k = make_kernel(KernelFamily::bump, 0.3, 1);
  const auto a = DomainSpec::interval(0.0, 1.0);
  const auto b = DomainSpec::interval(0.0, 0.75);
  const auto g = std::make_shared<const ContainerGrid>(GridSpec(1.0 / 64.0).cover({a, b}));
  const auto oa = assemble(k, a, g), ob = assemble(k, b, g);
  const Matrix ca = oa.container_matrix(), cb = ob.container_matrix();
  oracle::Dense sq(ca.rows(), std::vector<double>(ca.rows(), 0.0));
  // ||D||_2^2 is the dominant eigenvalue of D^2
  for (std::size_t i = 0; i < ca.rows(); ++i)
    for (std::size_t j = 0; j < ca.rows(); ++j)
      for (std::size_t l = 0; l < ca.rows(); ++l) sq[i][j] += (ca(i, l) - cb(i, l)) * (ca(l, j) - cb(l, j));
  const double oracle_norm = std::sqrt(oracle::power_iteration(sq).value);
  EXPECT_NEAR(operator_norm_diff(oa, ob), oracle_norm, 1e-9);
}

TEST(Lipschitz, BoundHoldsForShrunkIntervals) {
  const KernelSpec k = make_kernel(KernelFamily::bump, 0.3, 1);
  const auto a = DomainSpec::interval(0.0, 1.0);
  for (double s : {0.1, 0.05, 0.01}) {
    const auto b = DomainSpec::interval(0.0, 1.0 - s);
    const double bound = std::sqrt(2.0) * k.sup_norm() * std::sqrt(s) * std::sqrt(1.0 + 1.0 + (1.0 - s));
    EXPECT_NEAR(lipschitz_bound(k, a, b), bound, 1e-14);
    const auto g = std::make_shared<const ContainerGrid>(GridSpec(1.0 / 400.0).cover({a, b}));
    EXPECT_LE(operator_norm_diff(assemble(k, a, g), assemble(k, b, g)), bound);
  }
}

TEST(Binary, WritesHeaderAndEntries) {
  const KernelSpec k = make_kernel(KernelFamily::tent, 0.5, 1);
  const auto d = DomainSpec::interval(0.0, 1.0);
  const auto op = assemble(k, d, GridSpec(0.25).cover({d}));
  const std::string path = ::testing::TempDir() + "/k.bin";
  write_binary(op, path);
  std::ifstream in(path, std::ios::binary);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  ASSERT_EQ(bytes.size(), 16 + op.size() * op.size() * 8);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "NLSP");
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), op.size());
  double k01;
  std::memcpy(&k01, bytes.data() + 16 + 8, 8);
  EXPECT_EQ(k01, op.K(0, 1));
}

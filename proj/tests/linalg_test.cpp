#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "nlspec/linalg.hpp"
#include "oracles.hpp"

using namespace nlspec;

namespace {
Matrix to_matrix(const oracle::Dense& a) {
  Matrix m(a.size(), a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) m(i, j) = a[i][j];
  return m;
}
}  // namespace

TEST(Jacobi, TwoByTwoClosedForm) {
  Matrix a(2, 2);
  a(0, 0) = 2.0;
  a(0, 1) = a(1, 0) = 1.0;
  a(1, 1) = 2.0;
  auto e = linalg::jacobi_eigen(a);
  std::sort(e.values.begin(), e.values.end());
  EXPECT_NEAR(e.values[0], 1.0, 1e-15);
  EXPECT_NEAR(e.values[1], 3.0, 1e-15);
}

TEST(Jacobi, RankOneHasSingleNonzeroEigenvalue) {
  const std::vector<double> v{1.0, -2.0, 0.5, 3.0, 1.5};
  Matrix a(5, 5);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) a(i, j) = v[i] * v[j];
  auto e = linalg::jacobi_eigen(a);
  std::sort(e.values.begin(), e.values.end());
  EXPECT_NEAR(e.values.back(), dot(v, v), 1e-13);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(e.values[i], 0.0, 1e-13);
}

TEST(Jacobi, ReconstructsRandomMatrix) {
  const auto d = oracle::random_symmetric(24, 7);
  const auto e = linalg::jacobi_eigen(to_matrix(d));
  const std::size_t n = d.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0, g = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        // eigenvectors are the rows of e.vectors
        s += e.vectors(k, i) * e.values[k] * e.vectors(k, j);
        g += e.vectors(i, k) * e.vectors(j, k);
      }
      EXPECT_NEAR(s, d[i][j], 1e-12);
      EXPECT_NEAR(g, i == j ? 1.0 : 0.0, 1e-12);
    }
}

TEST(Lapack, AgreesWithJacobi) {
  const auto d = oracle::random_symmetric(40, 11);
  auto j = linalg::jacobi_eigen(to_matrix(d)).values;
  auto l = linalg::symmetric_eigenvalues(to_matrix(d));
  std::sort(j.begin(), j.end());
  std::sort(l.begin(), l.end());
  ASSERT_EQ(j.size(), l.size());
  for (std::size_t i = 0; i < j.size(); ++i) EXPECT_NEAR(j[i], l[i], 1e-12);
}

TEST(Lapack, LeadingPairsMatchPowerIteration) {
  // shift to make the dominant eigenvalue positive and separated
  auto d = oracle::random_symmetric(30, 5);
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t k = 0; k < d.size(); ++k) d[i][k] += 0.5;
  const auto pw = oracle::power_iteration(d);
  const auto e = linalg::symmetric_eigen_leading(to_matrix(d), 3);
  const double top = *std::max_element(e.values.begin(), e.values.end());
  EXPECT_NEAR(top, pw.value, 1e-10);
}

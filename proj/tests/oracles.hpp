#pragma once

// Test-side reference computations. Nothing here calls into the library's
// numerical routines, so agreement is a genuine cross-check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace oracle {

using Dense = std::vector<std::vector<double>>;

/// Radial profile written out from the closed forms, without normalization.
inline double profile(const std::string& family, double width, double r) {
  if (family == "bump") {
    const double s = 1.0 - r * r / (width * width);
    return s > 0.0 ? s * s : 0.0;
  }
  if (family == "tent") return std::max(0.0, 1.0 - r / width);
  return std::exp(-r * r / (2.0 * width * width));
}

/// Composite Gauss-Legendre (5 points) on [a, b] split into m panels.
inline double gauss(const std::function<double(double)>& f, double a, double b, int m = 2000) {
  static const double x[5] = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640, 0.9061798459386640};
  static const double w[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665, 0.2369268850561891,
                              0.2369268850561891};
  const double step = (b - a) / m;
  double s = 0.0;
  for (int p = 0; p < m; ++p) {
    const double c = a + (p + 0.5) * step;
    for (int q = 0; q < 5; ++q) s += w[q] * f(c + 0.5 * step * x[q]);
  }
  return 0.5 * step * s;
}

/// Mass of the unnormalized profile in dimension dim.
inline double profile_mass(const std::string& family, double width, int dim) {
  const double R = family == "gaussian" ? 14.0 * width : width;
  if (dim == 1) return 2.0 * gauss([&](double r) { return profile(family, width, r); }, 0.0, R);
  return gauss([&](double r) { return 2.0 * std::numbers::pi * r * profile(family, width, r); }, 0.0, R);
}

inline std::vector<double> matvec(const Dense& a, const std::vector<double>& x) {
  std::vector<double> y(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) y[i] += a[i][j] * x[j];
  return y;
}

struct Dominant {
  double value = 0.0;
  std::vector<double> vector;
};

/// Power iteration with a Rayleigh-quotient estimate, for matrices whose
/// dominant eigenvalue is positive and well separated.
inline Dominant power_iteration(const Dense& a, int iters = 20000, double tol = 1e-15) {
  const std::size_t n = a.size();
  std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n)));
  double lam = 0.0;
  for (int it = 0; it < iters; ++it) {
    auto w = matvec(a, v);
    double nw = 0.0, rq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      nw += w[i] * w[i];
      rq += v[i] * w[i];
    }
    nw = std::sqrt(nw);
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / nw;
    const bool done = std::fabs(rq - lam) <= tol * std::fabs(rq);
    lam = rq;
    if (done && it > 10) break;
  }
  return {lam, v};
}

inline Dense random_symmetric(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Dense a(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) a[i][j] = a[j][i] = u(rng);
  return a;
}

}  // namespace oracle

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "nlspec/error.hpp"
#include "nlspec/linalg.hpp"
#include "nlspec/operator.hpp"

namespace nlspec {

enum class EigenMethod { automatic, jacobi, lapack };

struct SpectralOptions {
  EigenMethod method = EigenMethod::automatic;
  /// Number of leading eigenvectors to keep; SIZE_MAX keeps all.
  std::size_t vectors = std::numeric_limits<std::size_t>::max();
  /// Simplicity threshold relative to ||K|| = |mu_1|.
  double gap_tol_rel = 1e-6;
  /// automatic uses Jacobi up to this size and LAPACK above it.
  std::size_t jacobi_max_n = 512;
  linalg::JacobiOptions jacobi;
};

/// Eigenvalues mu_i of K sorted by |mu| descending (ties: larger mu
/// first), lambda_i = 1 - mu_i, and leading eigenvectors normalized in the
/// discrete L^2 product with weight h^N.
struct Spectrum {
  std::vector<double> mus;
  std::vector<double> lambdas;
  std::vector<double> gaps;
  std::vector<bool> simple;
  std::vector<std::vector<double>> vectors;  // vectors[i] belongs to mus[i]
  double weight = 1.0;
  double gap_tol = 0.0;
  double trace = 0.0;
  std::string method;
  int sweeps = 0;

  std::size_t size() const noexcept { return mus.size(); }
  double mu1() const { return mus.at(0); }
  double lambda1() const { return lambdas.at(0); }

  /// The k-th largest eigenvalue by signed value (k = 0 is the largest).
  double descending(std::size_t k) const {
    std::vector<double> v = mus;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end(), std::greater<>());
    return v[k];
  }
};

namespace detail {
inline std::vector<std::size_t> magnitude_order(const std::vector<double>& w) {
  std::vector<std::size_t> order(w.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double fa = std::fabs(w[a]);
    const double fb = std::fabs(w[b]);
    if (fa != fb) return fa > fb;
    return w[a] > w[b];
  });
  return order;
}

inline void finish_vector(std::vector<double>& v, double weight) {
  double s = 0.0;
  for (double x : v) s += x * x;
  const double scale = 1.0 / std::sqrt(s * weight);
  // First entry within round-off of the largest magnitude, so mirror
  // symmetric vectors get a reproducible sign.
  double peak = 0.0;
  for (double x : v) peak = std::max(peak, std::fabs(x));
  std::size_t big = 0;
  while (big + 1 < v.size() && std::fabs(v[big]) < peak * (1.0 - 1e-9)) ++big;
  const double sign = v.empty() || v[big] >= 0.0 ? 1.0 : -1.0;
  for (double& x : v) x *= sign * scale;
}
}  // namespace detail

/// Full symmetric eigendecomposition of a matrix whose quadrature weight is
/// `weight` (h^N for Nystrom matrices).
inline Spectrum eigendecompose(const Matrix& k, double weight, const SpectralOptions& opt = {}) {
  if (!is_symmetric(k)) throw Error("spectral", "symmetric_input", "matrix is not exactly symmetric");
  const std::size_t n = k.rows();
  Spectrum s;
  s.weight = weight;
  for (std::size_t i = 0; i < n; ++i) s.trace += k(i, i);
  if (n == 0) return s;

  const bool use_jacobi =
      opt.method == EigenMethod::jacobi || (opt.method == EigenMethod::automatic && n <= opt.jacobi_max_n);
  const std::size_t want = std::min(opt.vectors, n);

  EigenPairs pairs;
  if (use_jacobi) {
    pairs = linalg::jacobi_eigen(k, opt.jacobi);
    s.method = "jacobi";
  } else {
    pairs = linalg::symmetric_eigen_leading(k, want);
    s.method = "lapack";
  }
  s.sweeps = pairs.sweeps;

  const auto order = detail::magnitude_order(pairs.values);
  s.mus.resize(n);
  for (std::size_t r = 0; r < n; ++r) s.mus[r] = pairs.values[order[r]];
  s.lambdas.resize(n);
  for (std::size_t r = 0; r < n; ++r) s.lambdas[r] = 1.0 - s.mus[r];

  std::vector<std::ptrdiff_t> row_of(pairs.values.size(), -1);
  for (std::size_t r = 0; r < pairs.index.size(); ++r) row_of[pairs.index[r]] = static_cast<std::ptrdiff_t>(r);
  for (std::size_t r = 0; r < want; ++r) {
    const std::ptrdiff_t row = row_of[order[r]];
    if (row < 0) break;
    auto src = pairs.vectors.row(static_cast<std::size_t>(row));
    std::vector<double> v(src.begin(), src.end());
    detail::finish_vector(v, weight);
    s.vectors.push_back(std::move(v));
  }

  // Nearest-neighbor gaps in value order.
  std::vector<double> sorted = pairs.values;
  std::sort(sorted.begin(), sorted.end());
  s.gaps.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    const double mu = s.mus[r];
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), mu);
    const std::size_t pos = static_cast<std::size_t>(it - sorted.begin());
    double g = std::numeric_limits<double>::infinity();
    if (pos > 0) g = std::min(g, mu - sorted[pos - 1]);
    if (pos + 1 < n) g = std::min(g, sorted[pos + 1] - mu);
    s.gaps[r] = g;
  }
  s.gap_tol = opt.gap_tol_rel * std::fabs(s.mus.front());
  s.simple.resize(n);
  for (std::size_t r = 0; r < n; ++r) s.simple[r] = s.gaps[r] > s.gap_tol;
  return s;
}

inline Spectrum eigendecompose(const DiscreteOperator& op, const SpectralOptions& opt = {}) {
  return eigendecompose(op.K, op.cell_weight(), opt);
}

/// Discrete Rayleigh functional (||u||^2 - <u, K u>) / ||u||^2, the
/// quadrature of (1/2) iint J(x-y) (u(y) - u(x))^2 / ||u||^2 for u
/// supported on the active nodes.
inline double rayleigh_lambda1(const Matrix& k, std::span<const double> u) {
  if (u.size() != k.rows()) throw Error("spectral", "vector_size", "vector length differs from the operator size");
  const double uu = dot(u, u);
  if (!(uu > 0.0)) throw Error("spectral", "nonzero_vector", "Rayleigh functional of the zero vector");
  const auto ku = multiply(k, u);
  return (uu - dot(u, ku)) / uu;
}

inline double rayleigh_lambda1(const DiscreteOperator& op, std::span<const double> u) {
  return rayleigh_lambda1(op.K, u);
}

struct SimpleFlag {
  std::size_t index = 0;  // 1-based position in magnitude order
  bool simple = false;
  double gap = 0.0;
};

inline std::vector<SimpleFlag> detect_simple_systems(const Spectrum& s, std::size_t count) {
  count = std::min(count, s.size());
  std::vector<SimpleFlag> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back({i + 1, static_cast<bool>(s.simple[i]), s.gaps[i]});
  return out;
}

/// Structural facts every spectrum of a kernel-connected domain satisfies:
/// mu_1 > 0 and simple with a positive eigenvector, 0 < lambda_1 < 1 and a
/// second nonzero eigenvalue. `connected = false` drops simplicity and
/// positivity, which fail for exactly decoupled components.
inline std::vector<Check> spectral_structure_checks(const Spectrum& s, bool connected = true) {
  std::vector<Check> out;
  auto add = [&](const char* name, bool ok, std::string detail) {
    out.push_back({"spectral", name, ok, std::move(detail)});
  };
  if (s.size() == 0) {
    add("nonempty_spectrum", false, "empty operator");
    return out;
  }
  add("mu1_positive", s.mu1() > 0.0, "mu1=" + detail::fmt(s.mu1()));
  add("lambda1_in_unit_interval", s.lambda1() > 0.0 && s.lambda1() < 1.0, "lambda1=" + detail::fmt(s.lambda1()));
  const double mu2 = s.size() > 1 ? s.mus[1] : 0.0;
  add("range_dim_at_least_two", std::fabs(mu2) > 1e-12, "mu2=" + detail::fmt(mu2));
  if (connected) {
    add("mu1_simple", s.simple[0], "gap=" + detail::fmt(s.gaps[0]));
    bool positive = !s.vectors.empty();
    if (positive)
      for (double x : s.vectors[0]) positive = positive && x > 0.0;
    add("perron_positive", positive, s.vectors.empty() ? "no eigenvector" : "first eigenvector sign");
  }
  return out;
}

}  // namespace nlspec

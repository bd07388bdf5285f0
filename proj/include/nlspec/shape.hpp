#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "nlspec/domain.hpp"
#include "nlspec/error.hpp"
#include "nlspec/kernel.hpp"
#include "nlspec/operator.hpp"
#include "nlspec/spectral.hpp"

namespace nlspec {

/// Discretization of h* J_{h(Omega)} h*^{-1} on the base domain's active
/// nodes: P(i, j) = J(h(x_i) - h(x_j)) |det Dh(x_j)| h^N. P is self-adjoint
/// in the inner product with weights w_j = |det Dh(x_j)| h^N.
struct PullbackOperator {
  Matrix kernel_values;  // J(h(x_i) - h(x_j)), symmetric
  std::vector<double> weights;
  std::vector<Point> nodes;

  std::size_t size() const noexcept { return weights.size(); }

  Matrix matrix() const {
    Matrix p = kernel_values;
    for (std::size_t i = 0; i < p.rows(); ++i)
      for (std::size_t j = 0; j < p.cols(); ++j) p(i, j) *= weights[j];
    return p;
  }

  /// W^{1/2} A W^{1/2}: symmetric and similar to P.
  Matrix symmetrized() const {
    Matrix s = kernel_values;
    std::vector<double> r(weights.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::sqrt(weights[i]);
    for (std::size_t i = 0; i < s.rows(); ++i)
      for (std::size_t j = 0; j < s.cols(); ++j) s(i, j) *= r[i] * r[j];
    for (std::size_t i = 0; i < s.rows(); ++i)
      for (std::size_t j = i + 1; j < s.cols(); ++j) s(j, i) = s(i, j);
    return s;
  }
};

namespace detail {
inline void require_c1(const KernelSpec& k) {
  if (k.smoothness == Smoothness::C0)
    throw Error("shape", "kernel_smoothness", "shape derivatives need a C^1 kernel; tent is only C^0");
}
}  // namespace detail

inline PullbackOperator pullback_operator(const KernelSpec& k, const DomainSpec& base, const MapSpec& m,
                                          const ContainerGrid& g) {
  detail::require_c1(k);
  MapSpec map = m;
  map.dim = base.dim();
  const MapCheck mc = check_map(map, base.bounding_box());
  if (!(mc.min_det > 0.0)) throw Error("shape", "nonvanishing_jacobian", "det Dh is not positive on the base");
  if (!(mc.min_stretch > 0.0)) throw Error("shape", "injective_map", "map is not injective on the base");

  const DiscreteOperator base_op = assemble(k, base, g);
  PullbackOperator p;
  p.nodes = base_op.active_nodes();
  std::vector<Point> image(p.nodes.size());
  p.weights.resize(p.nodes.size());
  for (std::size_t i = 0; i < p.nodes.size(); ++i) {
    image[i] = map.apply(p.nodes[i]);
    p.weights[i] = map.jacobian_det(p.nodes[i]) * g.cell_weight();
  }
  p.kernel_values = detail::kernel_matrix(k, image, 1.0);
  return p;
}

/// max over random pairs of |<phi, P psi>_w - <P phi, psi>_w| / (|phi|_w |psi|_w).
/// Passing unit weights measures plain (unweighted) symmetry instead.
inline double weighted_selfadjointness_check(const Matrix& p, const std::vector<double>& w, int trials = 16,
                                             std::uint64_t seed = 12345) {
  const std::size_t n = p.rows();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  auto inner = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += w[i] * a[i] * b[i];
    return s;
  };
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> phi(n), psi(n);
    for (auto& x : phi) x = uni(rng);
    for (auto& x : psi) x = uni(rng);
    const double lhs = inner(phi, multiply(p, psi));
    const double rhs = inner(multiply(p, phi), psi);
    const double scale = std::sqrt(inner(phi, phi) * inner(psi, psi));
    worst = std::max(worst, std::fabs(lhs - rhs) / scale);
  }
  return worst;
}

/// Eigenvalues of a pull-back operator (those of P, computed from the
/// similar symmetric matrix), sorted by magnitude.
inline Spectrum pullback_spectrum(const PullbackOperator& p, std::size_t vectors = 0) {
  SpectralOptions opt;
  opt.vectors = vectors;
  opt.method = EigenMethod::lapack;
  return eigendecompose(p.symmetrized(), 1.0, opt);
}

/// Values of eigenfunction idx (0-based, magnitude order) at arbitrary
/// points via u(x) = (1/mu) sum_j J(x - x_j) u_j h^N.
inline std::vector<double> eigenfunction_values(const DiscreteOperator& op, const Spectrum& s, std::size_t idx,
                                                const std::vector<Point>& points) {
  if (idx >= s.vectors.size()) throw Error("shape", "eigenvector_available", "eigenvector was not computed");
  const double mu = s.mus[idx];
  if (std::fabs(mu) < 1e-10) throw Error("shape", "nonzero_eigenvalue", "|mu| < 1e-10: smoothing formula invalid");
  const auto nodes = op.active_nodes();
  const auto& u = s.vectors[idx];
  const double w = op.cell_weight();
  std::vector<double> out(points.size());
  const double rc = op.kernel.cutoff_radius();
  const double cutoff2 = op.kernel.family == KernelFamily::gaussian ? rc * rc : std::numeric_limits<double>::infinity();
  parallel_for(points.size(), [&](std::size_t p) {
    double acc = 0.0;
    for (std::size_t j = 0; j < nodes.size(); ++j) acc += detail::kernel_entry(op.kernel, points[p], nodes[j], cutoff2) * u[j];
    out[p] = acc * w / mu;
  });
  return out;
}

/// Trace of eigenfunction idx on boundary samples.
inline std::vector<double> boundary_eigenfunction(const DiscreteOperator& op, const Spectrum& s, std::size_t idx,
                                                  const BoundaryQuadrature& bq) {
  detail::require_c1(op.kernel);
  if (idx >= s.size() || !s.simple[idx])
    throw Error("shape", "simple_eigenvalue", "eigenvalue " + std::to_string(idx + 1) + " is not simple");
  std::vector<Point> pts;
  pts.reserve(bq.samples.size());
  for (const auto& b : bq.samples) pts.push_back(b.x);
  return eigenfunction_values(op, s, idx, pts);
}

struct FiniteDifference {
  double t = 0.0;
  double lambda_plus = 0.0;
  double lambda_minus = 0.0;
  double central = 0.0;
  double forward = 0.0;
  double backward = 0.0;
};

struct ShapeDerivativeReport {
  std::string field_name;
  std::size_t index = 0;  // 0-based
  double lambda0 = 0.0;
  double mu0 = 0.0;
  double boundary_integral = 0.0;  // int_{dOmega} u0^2 V.N dS
  double dlambda_formula = 0.0;    // -(1 - lambda0) * boundary_integral
  double dmu_formula = 0.0;        // mu0 * boundary_integral
  std::vector<FiniteDifference> fd;  // fd[0] is the primary step
  double t_used = 0.0;
  double dlambda_fd = 0.0;
  double abs_error = 0.0;
  double rel_error = 0.0;  // relative to |dlambda_fd|; absolute when the derivative vanishes
  double gap = 0.0;
  double discretization_error = 0.0;  // |lambda(h) - lambda(2h)|
  int boundary_samples = 0;
  bool boundary_c1 = true;
  std::vector<Check> checks;
};

struct ShapeOptions {
  std::vector<double> t_fd;  // empty: 1e-3 * diam(Omega)
  int boundary_samples = 256;
  double gap_factor = 10.0;
};

namespace detail {
/// Eigenvalue of the deformed problem closest to lambda0, refusing
/// ambiguous matches.
inline double track_lambda(const std::vector<double>& lambdas, double lambda0, double gap) {
  double best = std::numeric_limits<double>::infinity(), second = best;
  double value = 0.0;
  for (double l : lambdas) {
    const double d = std::fabs(l - lambda0);
    if (d < best) {
      second = best;
      best = d;
      value = l;
    } else if (d < second) {
      second = d;
    }
  }
  if (best >= 0.5 * gap || second <= 2.0 * best)
    throw Error("shape", "eigenvalue_crossing",
                "tracking lost: nearest shift " + fmt(best) + ", next " + fmt(second) + ", gap " + fmt(gap));
  return value;
}
}  // namespace detail

inline ShapeDerivativeReport shape_derivative(const KernelSpec& k, const DomainSpec& d, std::size_t idx,
                                              const VectorField& v, const ContainerGrid& g,
                                              const ShapeOptions& opt = {}) {
  detail::require_c1(k);
  ShapeDerivativeReport r;
  r.field_name = v.name();
  r.index = idx;

  const DiscreteOperator op = assemble(k, d, g);
  SpectralOptions so;
  so.vectors = idx + 1;
  const Spectrum s = eigendecompose(op, so);
  if (idx >= s.size()) throw Error("shape", "eigenvalue_index", "index beyond spectrum");
  r.mu0 = s.mus[idx];
  r.lambda0 = s.lambdas[idx];
  r.gap = s.gaps[idx];

  {
    const ContainerGrid coarse = ContainerGrid::covering({d}, 2.0 * g.h());
    SpectralOptions co;
    co.vectors = 0;
    const Spectrum sc = eigendecompose(assemble(k, d, coarse), co);
    r.discretization_error = idx < sc.size() ? std::fabs(sc.lambdas[idx] - r.lambda0) : 0.0;
  }
  if (!s.simple[idx] || !(r.gap > opt.gap_factor * r.discretization_error))
    throw Error("shape", "simple_eigenvalue",
                "eigenvalue gap " + detail::fmt(r.gap) + " is not above " + detail::fmt(opt.gap_factor) +
                    " x discretization error " + detail::fmt(r.discretization_error));

  const BoundaryQuadrature bq = boundary_quadrature(d, opt.boundary_samples);
  r.boundary_samples = static_cast<int>(bq.samples.size());
  r.boundary_c1 = bq.c1;
  const auto ub = boundary_eigenfunction(op, s, idx, bq);
  for (std::size_t b = 0; b < bq.samples.size(); ++b) {
    const auto& smp = bq.samples[b];
    r.boundary_integral += smp.weight * ub[b] * ub[b] * dot(v(smp.x), smp.normal);
  }
  r.dmu_formula = r.mu0 * r.boundary_integral;
  r.dlambda_formula = -(1.0 - r.lambda0) * r.boundary_integral;

  std::vector<double> ts = opt.t_fd;
  if (ts.empty()) ts.push_back(1e-3 * d.diameter());
  for (double t : ts) {
    auto lambda_at = [&](double tt) {
      const PullbackOperator p = pullback_operator(k, d, MapSpec::perturbation(v, tt, d.dim()), g);
      return detail::track_lambda(pullback_spectrum(p).lambdas, r.lambda0, r.gap);
    };
    FiniteDifference f;
    f.t = t;
    f.lambda_plus = lambda_at(t);
    f.lambda_minus = lambda_at(-t);
    f.central = (f.lambda_plus - f.lambda_minus) / (2.0 * t);
    f.forward = (f.lambda_plus - r.lambda0) / t;
    f.backward = (r.lambda0 - f.lambda_minus) / t;
    r.fd.push_back(f);
  }
  r.t_used = r.fd.front().t;
  r.dlambda_fd = r.fd.front().central;
  r.abs_error = std::fabs(r.dlambda_formula - r.dlambda_fd);
  r.rel_error = std::fabs(r.dlambda_fd) > 1e-10 ? r.abs_error / std::fabs(r.dlambda_fd) : r.abs_error;

  r.checks.push_back({"shape", "dlambda_equals_minus_dmu", std::fabs(r.dlambda_formula + r.dmu_formula) <= 1e-12,
                      detail::fmt(r.dlambda_formula + r.dmu_formula)});
  return r;
}

/// Leading eigenvalues of the pull-back compared with direct assembly on
/// the image domain h(Omega).
struct PullbackComparison {
  std::vector<double> pullback_mus;
  std::vector<double> direct_mus;
  std::vector<double> rel_diff;
  double weighted_residual = 0.0;
  std::size_t base_nodes = 0;
  std::size_t image_nodes = 0;
};

inline PullbackComparison compare_pullback_with_image(const KernelSpec& k, const DomainSpec& base, const MapSpec& m,
                                                      double h, std::size_t count) {
  PullbackComparison c;
  const ContainerGrid gb = ContainerGrid::covering({base}, h);
  const PullbackOperator p = pullback_operator(k, base, m, gb);
  c.base_nodes = p.size();
  const Spectrum sp = pullback_spectrum(p);
  c.weighted_residual = weighted_selfadjointness_check(p.matrix(), p.weights);

  const DomainSpec image = DomainSpec::mapped(base, m);
  const ContainerGrid gi = ContainerGrid::covering({image}, h);
  const DiscreteOperator op = assemble(k, image, gi);
  c.image_nodes = op.size();
  SpectralOptions so;
  so.vectors = 0;
  const Spectrum sd = eigendecompose(op, so);
  for (std::size_t i = 0; i < count && i < sp.size() && i < sd.size(); ++i) {
    c.pullback_mus.push_back(sp.mus[i]);
    c.direct_mus.push_back(sd.mus[i]);
    c.rel_diff.push_back(std::fabs(sp.mus[i] - sd.mus[i]) / std::fabs(sd.mus[i]));
  }
  return c;
}

}  // namespace nlspec

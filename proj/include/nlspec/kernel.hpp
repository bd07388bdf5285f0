#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <string_view>

#include "nlspec/error.hpp"
#include "nlspec/geometry.hpp"

namespace nlspec {

enum class KernelFamily { bump, gaussian, tent };
enum class Smoothness { C0, C1, Cinf };

inline std::string_view to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::bump: return "bump";
    case KernelFamily::gaussian: return "gaussian";
    case KernelFamily::tent: return "tent";
  }
  return "?";
}

inline std::string_view to_string(Smoothness s) {
  switch (s) {
    case Smoothness::C0: return "C0";
    case Smoothness::C1: return "C1";
    case Smoothness::Cinf: return "Cinf";
  }
  return "?";
}

inline KernelFamily kernel_family_from_string(std::string_view s) {
  if (s == "bump") return KernelFamily::bump;
  if (s == "gaussian") return KernelFamily::gaussian;
  if (s == "tent") return KernelFamily::tent;
  throw Error("kernel", "known_family", "unknown kernel family '" + std::string(s) + "'");
}

/// Adaptive Simpson quadrature of f on [a, b] to absolute tolerance tol.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
  struct Rec {
    const std::function<double(double)>& f;
    double run(double a, double b, double fa, double fm, double fb, double whole, double tol, int depth) const {
      const double m = 0.5 * (a + b);
      const double lm = 0.5 * (a + m);
      const double rm = 0.5 * (m + b);
      const double flm = f(lm);
      const double frm = f(rm);
      const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
      const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
      const double delta = left + right - whole;
      if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
      return run(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + run(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
    }
  };
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return Rec{f}.run(a, b, fa, fm, fb, whole, tol, 48);
}

/// Radial dispersal kernel: nonnegative, radially nonincreasing, unit mass.
struct KernelSpec {
  KernelFamily family = KernelFamily::bump;
  double width = 1.0;  // support radius (bump, tent) or standard deviation (gaussian)
  int dim = 1;
  double norm_const = 1.0;
  Smoothness smoothness = Smoothness::C1;
  double mass_error = 0.0;  // |quadrature mass - 1| recorded at construction

  /// Unnormalized radial profile as a function of |x|^2.
  double profile_sq(double r2) const {
    switch (family) {
      case KernelFamily::bump: {
        const double s = 1.0 - r2 / (width * width);
        return s > 0.0 ? s * s : 0.0;
      }
      case KernelFamily::gaussian: return std::exp(-r2 / (2.0 * width * width));
      case KernelFamily::tent: {
        const double s = 1.0 - std::sqrt(r2) / width;
        return s > 0.0 ? s : 0.0;
      }
    }
    return 0.0;
  }

  /// J evaluated at a point with squared norm r2.
  double value_sq(double r2) const { return norm_const * profile_sq(r2); }

  /// J(x) for a point given in coordinates; x.size() must equal dim.
  double operator()(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim)
      throw Error("kernel", "dimension_match",
                  "point has dimension " + std::to_string(x.size()) + ", kernel " + std::to_string(dim));
    double r2 = 0.0;
    for (double c : x) r2 += c * c;
    return value_sq(r2);
  }

  double at(const Point& x) const { return value_sq(norm2(x)); }

  double sup_norm() const { return norm_const; }

  /// Radius beyond which assembly treats J as zero. Exact support for
  /// compact families; 8 standard deviations for the gaussian.
  double cutoff_radius() const { return family == KernelFamily::gaussian ? 8.0 * width : width; }

  bool operator==(const KernelSpec&) const = default;
};

namespace detail {
inline double analytic_norm_const(KernelFamily f, double w, int dim) {
  switch (f) {
    case KernelFamily::bump: return dim == 1 ? 15.0 / (16.0 * w) : 3.0 / (kPi * w * w);
    case KernelFamily::gaussian:
      return dim == 1 ? 1.0 / (w * std::sqrt(2.0 * kPi)) : 1.0 / (2.0 * kPi * w * w);
    case KernelFamily::tent: return dim == 1 ? 1.0 / w : 3.0 / (kPi * w * w);
  }
  return 0.0;
}

/// Mass of c * profile over R^dim by adaptive radial quadrature.
inline double radial_mass(const KernelSpec& k) {
  const double r_max = k.family == KernelFamily::gaussian ? 12.0 * k.width : k.width;
  auto integrand = [&](double r) {
    const double shell = k.dim == 1 ? 2.0 : 2.0 * kPi * r;
    return shell * k.value_sq(r * r);
  };
  return adaptive_simpson(integrand, 0.0, r_max, 1e-14);
}
}  // namespace detail

/// Builds a unit-mass kernel. The closed-form normalization is verified
/// against adaptive radial quadrature and rejected if they disagree by
/// more than 1e-8.
inline KernelSpec make_kernel(KernelFamily family, double width, int dim) {
  if (!(width > 0.0) || !std::isfinite(width))
    throw Error("kernel", "positive_width", "kernel width must be positive, got " + std::to_string(width));
  if (dim != 1 && dim != 2)
    throw Error("kernel", "supported_dim", "dimension must be 1 or 2, got " + std::to_string(dim));

  KernelSpec k;
  k.family = family;
  k.width = width;
  k.dim = dim;
  k.smoothness = family == KernelFamily::bump       ? Smoothness::C1
                 : family == KernelFamily::gaussian ? Smoothness::Cinf
                                                    : Smoothness::C0;
  k.norm_const = detail::analytic_norm_const(family, width, dim);
  k.mass_error = std::fabs(detail::radial_mass(k) - 1.0);
  if (k.mass_error > 1e-8)
    throw Error("kernel", "unit_mass", "normalization mismatch " + std::to_string(k.mass_error));
  return k;
}

}  // namespace nlspec

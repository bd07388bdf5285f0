#pragma once

#include <array>
#include <cmath>

namespace nlspec {

/// Point in R^1 or R^2. One-dimensional points leave the second
/// coordinate at zero so every formula works for both dimensions.
using Point = std::array<double, 2>;

inline constexpr double kPi = 3.14159265358979323846;

inline Point operator+(const Point& a, const Point& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Point operator-(const Point& a, const Point& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Point operator*(double s, const Point& a) { return {s * a[0], s * a[1]}; }
inline double dot(const Point& a, const Point& b) { return a[0] * b[0] + a[1] * b[1]; }
inline double norm2(const Point& a) { return dot(a, a); }
inline double norm(const Point& a) { return std::sqrt(norm2(a)); }

/// Axis-aligned box [lo, hi]; the second axis is ignored when dim == 1.
struct Box {
  Point lo{0.0, 0.0};
  Point hi{0.0, 0.0};

  double side(int axis) const { return hi[axis] - lo[axis]; }
  bool contains(const Box& other, int dim) const {
    for (int a = 0; a < dim; ++a)
      if (other.lo[a] < lo[a] || other.hi[a] > hi[a]) return false;
    return true;
  }
  bool operator==(const Box&) const = default;
};

inline Box hull(const Box& a, const Box& b) {
  return {{std::fmin(a.lo[0], b.lo[0]), std::fmin(a.lo[1], b.lo[1])},
          {std::fmax(a.hi[0], b.hi[0]), std::fmax(a.hi[1], b.hi[1])}};
}

}  // namespace nlspec

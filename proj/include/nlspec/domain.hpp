#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "nlspec/error.hpp"
#include "nlspec/geometry.hpp"

namespace nlspec {

// ---------------------------------------------------------------------------
// Vector fields and imbeddings
// ---------------------------------------------------------------------------

/// 2x2 Jacobian, row-major: {d0/dx0, d0/dx1, d1/dx0, d1/dx1}.
using Jacobian = std::array<double, 4>;

enum class FieldKind { constant, dilation, rotation, radial_bump };

/// Deformation velocity V used in h_t(x) = x + t V(x).
struct VectorField {
  FieldKind kind = FieldKind::dilation;
  Point direction{1.0, 0.0};  // constant field value
  Point center{0.0, 0.0};     // radial bump center
  double radius = 1.0;        // radial bump support

  static VectorField constant(Point e) { return {FieldKind::constant, e, {}, 1.0}; }
  static VectorField dilation() { return {FieldKind::dilation, {}, {}, 1.0}; }
  static VectorField rotation() { return {FieldKind::rotation, {}, {}, 1.0}; }
  static VectorField radial_bump(Point c, double r) { return {FieldKind::radial_bump, {}, c, r}; }

  std::string name() const {
    switch (kind) {
      case FieldKind::constant: return "translation";
      case FieldKind::dilation: return "dilation";
      case FieldKind::rotation: return "rotation";
      case FieldKind::radial_bump: return "radial_bump";
    }
    return "?";
  }

  Point operator()(const Point& x) const {
    switch (kind) {
      case FieldKind::constant: return direction;
      case FieldKind::dilation: return x;
      case FieldKind::rotation: return {-x[1], x[0]};
      case FieldKind::radial_bump: {
        const Point d = x - center;
        const double s = 1.0 - norm2(d) / (radius * radius);
        return s > 0.0 ? (s * s) * d : Point{0.0, 0.0};
      }
    }
    return {0.0, 0.0};
  }

  Jacobian jacobian(const Point& x) const {
    switch (kind) {
      case FieldKind::constant: return {0.0, 0.0, 0.0, 0.0};
      case FieldKind::dilation: return {1.0, 0.0, 0.0, 1.0};
      case FieldKind::rotation: return {0.0, -1.0, 1.0, 0.0};
      case FieldKind::radial_bump: {
        const Point d = x - center;
        const double r2 = radius * radius;
        const double s = 1.0 - norm2(d) / r2;
        if (s <= 0.0) return {0.0, 0.0, 0.0, 0.0};
        const double phi = s * s;
        const double dphi = -2.0 * s / r2;  // d(phi)/d(|d|^2)
        return {phi + 2.0 * dphi * d[0] * d[0], 2.0 * dphi * d[0] * d[1], 2.0 * dphi * d[1] * d[0],
                phi + 2.0 * dphi * d[1] * d[1]};
      }
    }
    return {0.0, 0.0, 0.0, 0.0};
  }

  bool operator==(const VectorField&) const = default;
};

enum class MapKind { affine_diagonal, dilation, perturbation_field };

/// C^1 imbedding h of a base domain into R^dim.
struct MapSpec {
  MapKind kind = MapKind::affine_diagonal;
  int dim = 2;
  Point scales{1.0, 1.0};  // affine_diagonal
  double factor = 1.0;     // dilation about the origin
  VectorField field;       // perturbation_field: h(x) = x + t V(x)
  double t = 0.0;

  static MapSpec affine_diagonal(Point s, int dim = 2) { return {MapKind::affine_diagonal, dim, s, 1.0, {}, 0.0}; }
  static MapSpec dilation(double f, int dim = 2) { return {MapKind::dilation, dim, {1.0, 1.0}, f, {}, 0.0}; }
  static MapSpec perturbation(VectorField v, double t, int dim = 2) {
    return {MapKind::perturbation_field, dim, {1.0, 1.0}, 1.0, v, t};
  }
  static MapSpec identity(int dim = 2) { return affine_diagonal({1.0, 1.0}, dim); }

  Point apply(const Point& x) const {
    Point y;
    switch (kind) {
      case MapKind::affine_diagonal: y = {scales[0] * x[0], scales[1] * x[1]}; break;
      case MapKind::dilation: y = factor * x; break;
      case MapKind::perturbation_field: y = x + t * field(x); break;
    }
    if (dim == 1) y[1] = 0.0;
    return y;
  }

  Jacobian jacobian(const Point& x) const {
    switch (kind) {
      case MapKind::affine_diagonal: return {scales[0], 0.0, 0.0, scales[1]};
      case MapKind::dilation: return {factor, 0.0, 0.0, factor};
      case MapKind::perturbation_field: {
        const Jacobian dv = field.jacobian(x);
        return {1.0 + t * dv[0], t * dv[1], t * dv[2], 1.0 + t * dv[3]};
      }
    }
    return {1.0, 0.0, 0.0, 1.0};
  }

  double signed_det(const Point& x) const {
    const Jacobian j = jacobian(x);
    return dim == 1 ? j[0] : j[0] * j[3] - j[1] * j[2];
  }

  /// |det Dh(x)|
  double jacobian_det(const Point& x) const { return std::fabs(signed_det(x)); }

  /// h^{-1}(y): closed form for linear maps, Newton iteration otherwise.
  Point inverse(const Point& y) const {
    switch (kind) {
      case MapKind::affine_diagonal: return {y[0] / scales[0], dim == 1 ? 0.0 : y[1] / scales[1]};
      case MapKind::dilation: return {y[0] / factor, dim == 1 ? 0.0 : y[1] / factor};
      case MapKind::perturbation_field: break;
    }
    Point x = y - t * field(y);
    if (dim == 1) x[1] = 0.0;
    for (int it = 0; it < 60; ++it) {
      const Point r = apply(x) - y;
      if (norm(r) <= 1e-15 * (1.0 + norm(y))) break;
      const Jacobian j = jacobian(x);
      if (dim == 1) {
        x[0] -= r[0] / j[0];
      } else {
        const double det = j[0] * j[3] - j[1] * j[2];
        x[0] -= (j[3] * r[0] - j[1] * r[1]) / det;
        x[1] -= (-j[2] * r[0] + j[0] * r[1]) / det;
      }
    }
    return x;
  }

  std::string describe() const {
    char buf[160];
    switch (kind) {
      case MapKind::affine_diagonal:
        std::snprintf(buf, sizeof buf, "affine_diagonal(%.17g,%.17g)", scales[0], scales[1]);
        break;
      case MapKind::dilation: std::snprintf(buf, sizeof buf, "dilation(%.17g)", factor); break;
      case MapKind::perturbation_field:
        std::snprintf(buf, sizeof buf, "field(%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g)", field.name().c_str(),
                      field.direction[0], field.direction[1], field.center[0], field.center[1], field.radius, t, 0.0);
        break;
    }
    return buf;
  }
};

// ---------------------------------------------------------------------------
// Domains
// ---------------------------------------------------------------------------

class DomainSpec;

struct BoxShape {
  Box box;
};
struct BallShape {
  Point center{0.0, 0.0};
  double radius = 1.0;
};
struct UnionOfBallsShape {
  std::vector<BallShape> balls;
};
/// {(x, y) : 0 < x < 1, 0 < y < 1 + sin(2 pi n x) / n}
struct RoughShape {
  int n = 1;
};
enum class HoleShape { box, ball };
/// base \ closure of the eps-scaled periodic translates of a concentric hole
/// occupying hole_fraction of the cell.
struct PerforatedShape {
  double eps = 0.25;
  double hole_fraction = 0.25;
  HoleShape hole = HoleShape::box;
  Box cell{{0.0, 0.0}, {1.0, 1.0}};
  Box base{{0.0, 0.0}, {1.0, 1.0}};
};
struct MappedShape {
  std::shared_ptr<const DomainSpec> base;
  MapSpec map;
};
struct PolygonShape {
  std::vector<Point> vertices;
};

/// Measure value with its provenance.
struct MeasureEstimate {
  double value = 0.0;
  double std_error = 0.0;
  bool exact = true;
};

/// Sample of a boundary quadrature rule.
struct BoundarySample {
  Point x;
  Point normal;
  double weight = 0.0;
};

struct BoundaryQuadrature {
  std::vector<BoundarySample> samples;
  bool c1 = true;  // false for boundaries with corners; derivatives are indicative only
};

namespace detail {
struct SubcellResult {
  double value = 0.0;
  double change = 0.0;
};

/// Measure of {x in box : pred(x)} by 4x4 supersampled cell counting,
/// refined until two successive levels agree to rel_tol.
inline SubcellResult subcell_measure(const std::function<bool(const Point&)>& pred, const Box& box, int dim,
                                     double rel_tol = 1e-3) {
  const int sub = 4;
  int cells = dim == 1 ? 256 : 32;
  const int max_cells = dim == 1 ? 1 << 16 : 1024;
  double prev = -1.0;
  SubcellResult res;
  for (; cells <= max_cells; cells *= 2) {
    const double hx = box.side(0) / (cells * sub);
    const double hy = dim == 1 ? 1.0 : box.side(1) / (cells * sub);
    const long ny = dim == 1 ? 1 : static_cast<long>(cells) * sub;
    const long nx = static_cast<long>(cells) * sub;
    long count = 0;
    for (long i = 0; i < nx; ++i) {
      const double x = box.lo[0] + (i + 0.5) * hx;
      for (long j = 0; j < ny; ++j) {
        const double y = dim == 1 ? 0.0 : box.lo[1] + (j + 0.5) * hy;
        if (pred({x, y})) ++count;
      }
    }
    const double value = count * hx * hy;
    if (prev >= 0.0) {
      res = {value, std::fabs(value - prev)};
      if (res.change <= rel_tol * std::fabs(value) || res.change <= 1e-12) return res;
    }
    prev = value;
    res = {value, std::fabs(value)};
  }
  return res;
}

inline double polygon_signed_area(const std::vector<Point>& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point& a = v[i];
    const Point& b = v[(i + 1) % v.size()];
    s += a[0] * b[1] - b[0] * a[1];
  }
  return 0.5 * s;
}

inline bool near_integer(double x) { return std::fabs(x - std::round(x)) < 1e-9; }

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace detail

/// Bounded open set in R^1 or R^2, described analytically.
class DomainSpec {
 public:
  using Shape = std::variant<BoxShape, BallShape, UnionOfBallsShape, RoughShape, PerforatedShape, MappedShape,
                             PolygonShape>;

  DomainSpec(int dim, Shape shape) : dim_(dim), shape_(std::move(shape)) {
    if (dim != 1 && dim != 2) throw Error("domain", "supported_dim", "dimension must be 1 or 2");
    validate();
  }

  static DomainSpec box(Point lo, Point hi, int dim = 2) { return {dim, BoxShape{{lo, hi}}}; }
  static DomainSpec interval(double a, double b) { return {1, BoxShape{{{a, 0.0}, {b, 0.0}}}}; }
  static DomainSpec unit_square() { return box({0.0, 0.0}, {1.0, 1.0}); }
  static DomainSpec ball(Point c, double r, int dim = 2) { return {dim, BallShape{c, r}}; }
  static DomainSpec union_of_balls(std::vector<BallShape> balls, int dim = 2) {
    return {dim, UnionOfBallsShape{std::move(balls)}};
  }
  static DomainSpec empty(int dim = 2) { return union_of_balls({}, dim); }
  static DomainSpec rough(int n) { return {2, RoughShape{n}}; }
  static DomainSpec perforated(PerforatedShape p, int dim = 2) { return {dim, p}; }
  static DomainSpec mapped(const DomainSpec& base, MapSpec m) {
    m.dim = base.dim();
    return {base.dim(), MappedShape{std::make_shared<const DomainSpec>(base), m}};
  }
  static DomainSpec polygon(std::vector<Point> v) { return {2, PolygonShape{std::move(v)}}; }

  int dim() const noexcept { return dim_; }
  const Shape& shape() const noexcept { return shape_; }

  /// Membership in the open set; boundary points are outside.
  bool contains(const Point& x) const {
    return std::visit([&](const auto& s) { return contains_impl(s, x); }, shape_);
  }

  Box bounding_box() const {
    return std::visit([&](const auto& s) { return bbox_impl(s); }, shape_);
  }

  double diameter() const {
    const Box b = bounding_box();
    return dim_ == 1 ? b.side(0) : std::hypot(b.side(0), b.side(1));
  }

  /// Canonical text form; equal keys denote the same set.
  std::string key() const {
    return std::visit([&](const auto& s) { return key_impl(s); }, shape_);
  }

  MeasureEstimate measure_estimate() const {
    return std::visit([&](const auto& s) { return measure_impl(s); }, shape_);
  }

  double measure() const { return measure_estimate().value; }

  /// Volume fraction |Q \ A| / |Q| for perforated domains, 1 otherwise.
  double solid_fraction() const {
    if (auto p = std::get_if<PerforatedShape>(&shape_)) return 1.0 - p->hole_fraction;
    return 1.0;
  }

 void validate() const {
    if (auto u = std::get_if<UnionOfBallsShape>(&shape_)) {
      for (std::size_t i = 0; i < u->balls.size(); ++i)
        for (std::size_t j = i + 1; j < u->balls.size(); ++j) {
          const auto& a = u->balls[i];
          const auto& b = u->balls[j];
          if (norm(a.center - b.center) <= a.radius + b.radius)
            throw Error("domain", "disjoint_balls", "balls " + std::to_string(i) + " and " + std::to_string(j) +
                                                        " overlap");
        }
    } else if (auto b = std::get_if<BallShape>(&shape_)) {
      if (!(b->radius > 0.0)) throw Error("domain", "positive_radius", "ball radius must be positive");
    } else if (auto r = std::get_if<RoughShape>(&shape_)) {
      if (r->n < 1) throw Error("domain", "positive_n", "rough family index must be >= 1");
      if (dim_ != 2) throw Error("domain", "supported_dim", "rough family is two-dimensional");
    } else if (auto p = std::get_if<PerforatedShape>(&shape_)) {
      if (!(p->eps > 0.0)) throw Error("domain", "positive_eps", "perforation scale must be positive");
      if (p->hole_fraction < 0.0 || p->hole_fraction >= 1.0)
        throw Error("domain", "hole_fraction_range", "hole fraction must lie in [0, 1)");
      if (p->hole == HoleShape::ball && dim_ == 2 &&
          std::sqrt(p->hole_fraction * p->cell.side(0) * p->cell.side(1) / kPi) >
              0.5 * std::min(p->cell.side(0), p->cell.side(1)))
        throw Error("domain", "hole_inside_cell", "ball hole does not fit in the cell");
    } else if (auto m = std::get_if<MappedShape>(&shape_)) {
      if (!m->base) throw Error("domain", "mapped_base", "mapped domain without base");
    } else if (auto poly = std::get_if<PolygonShape>(&shape_)) {
      if (poly->vertices.size() < 3) throw Error("domain", "polygon_vertices", "polygon needs >= 3 vertices");
    } else if (auto bx = std::get_if<BoxShape>(&shape_)) {
      for (int a = 0; a < dim_; ++a)
        if (bx->box.hi[a] < bx->box.lo[a]) throw Error("domain", "ordered_corners", "box corners out of order");
    }
  }

  // -- membership ----------------------------------------------------------
  bool contains_impl(const BoxShape& s, const Point& x) const {
    for (int a = 0; a < dim_; ++a)
      if (!(x[a] > s.box.lo[a] && x[a] < s.box.hi[a])) return false;
    return true;
  }
  bool contains_impl(const BallShape& s, const Point& x) const {
    Point d = x - s.center;
    if (dim_ == 1) d[1] = 0.0;
    return norm2(d) < s.radius * s.radius;
  }
  bool contains_impl(const UnionOfBallsShape& s, const Point& x) const {
    for (const auto& b : s.balls)
      if (contains_impl(b, x)) return true;
    return false;
  }
  bool contains_impl(const RoughShape& s, const Point& x) const {
    if (!(x[0] > 0.0 && x[0] < 1.0)) return false;
    return x[1] > 0.0 && x[1] < 1.0 + std::sin(2.0 * kPi * s.n * x[0]) / s.n;
  }
  bool in_hole(const PerforatedShape& s, const Point& x) const {
    if (s.hole_fraction == 0.0) return false;
    Point u{0.0, 0.0};
    for (int a = 0; a < dim_; ++a) {
      const double l = s.cell.side(a);
      const double v = x[a] / s.eps;
      u[a] = v - l * std::floor(v / l) - 0.5 * l;  // offset from the cell center
    }
    if (s.hole == HoleShape::box || dim_ == 1) {
      const double side = std::pow(s.hole_fraction, 1.0 / dim_);
      for (int a = 0; a < dim_; ++a)
        if (std::fabs(u[a]) > 0.5 * side * s.cell.side(a)) return false;
      return true;
    }
    const double rho2 = s.hole_fraction * s.cell.side(0) * s.cell.side(1) / kPi;
    return norm2(u) <= rho2;
  }
  bool contains_impl(const PerforatedShape& s, const Point& x) const {
    return contains_impl(BoxShape{s.base}, x) && !in_hole(s, x);
  }
  bool contains_impl(const MappedShape& s, const Point& x) const { return s.base->contains(s.map.inverse(x)); }
  bool contains_impl(const PolygonShape& s, const Point& x) const {
    bool inside = false;
    const auto& v = s.vertices;
    for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
      if ((v[i][1] > x[1]) != (v[j][1] > x[1])) {
        const double xc = v[j][0] + (x[1] - v[j][1]) * (v[i][0] - v[j][0]) / (v[i][1] - v[j][1]);
        if (x[0] < xc) inside = !inside;
      }
    }
    return inside;
  }

  // -- bounding boxes ------------------------------------------------------
  Box flatten(Box b) const {
    if (dim_ == 1) b.lo[1] = b.hi[1] = 0.0;
    return b;
  }
  Box bbox_impl(const BoxShape& s) const { return flatten(s.box); }
  Box bbox_impl(const BallShape& s) const {
    return flatten({{s.center[0] - s.radius, s.center[1] - s.radius}, {s.center[0] + s.radius, s.center[1] + s.radius}});
  }
  Box bbox_impl(const UnionOfBallsShape& s) const {
    if (s.balls.empty()) return {};
    Box b = bbox_impl(s.balls.front());
    for (const auto& ball : s.balls) b = hull(b, bbox_impl(ball));
    return b;
  }
  Box bbox_impl(const RoughShape& s) const { return {{0.0, 0.0}, {1.0, 1.0 + 1.0 / s.n}}; }
  Box bbox_impl(const PerforatedShape& s) const { return flatten(s.base); }
  Box bbox_impl(const MappedShape& s) const {
    const Box b = s.base->bounding_box();
    if (s.map.kind != MapKind::perturbation_field) {
      Box out{s.map.apply(b.lo), s.map.apply(b.lo)};
      for (const Point& c : {b.hi, Point{b.lo[0], b.hi[1]}, Point{b.hi[0], b.lo[1]}}) {
        const Point y = s.map.apply(c);
        out = hull(out, {y, y});
      }
      return flatten(out);
    }
    // Images of a sample lattice over the base box, padded by the sampling step.
    const int k = 64;
    Box out{s.map.apply(b.lo), s.map.apply(b.lo)};
    double step = 0.0;
    for (int i = 0; i <= k; ++i)
      for (int j = 0; j <= (dim_ == 1 ? 0 : k); ++j) {
        const Point x{b.lo[0] + b.side(0) * i / k, dim_ == 1 ? 0.0 : b.lo[1] + b.side(1) * j / k};
        const Point y = s.map.apply(x);
        out = hull(out, {y, y});
      }
    for (int a = 0; a < dim_; ++a) step = std::max(step, b.side(a) / k);
    Point pad{step, dim_ == 1 ? 0.0 : step};
    return flatten({out.lo - pad, out.hi + pad});
  }
  Box bbox_impl(const PolygonShape& s) const {
    Box b{s.vertices.front(), s.vertices.front()};
    for (const auto& v : s.vertices) b = hull(b, {v, v});
    return b;
  }

  // -- keys ----------------------------------------------------------------
  std::string key_impl(const BoxShape& s) const {
    using detail::fmt;
    return "box" + std::to_string(dim_) + "(" + fmt(s.box.lo[0]) + "," + fmt(s.box.lo[1]) + "," + fmt(s.box.hi[0]) +
           "," + fmt(s.box.hi[1]) + ")";
  }
  std::string key_impl(const BallShape& s) const {
    using detail::fmt;
    return "ball" + std::to_string(dim_) + "(" + fmt(s.center[0]) + "," + fmt(s.center[1]) + "," + fmt(s.radius) +
           ")";
  }
  std::string key_impl(const UnionOfBallsShape& s) const {
    std::string k = "union" + std::to_string(dim_) + "[";
    for (const auto& b : s.balls) k += key_impl(b);
    return k + "]";
  }
  std::string key_impl(const RoughShape& s) const { return "rough(" + std::to_string(s.n) + ")"; }
  std::string key_impl(const PerforatedShape& s) const {
    using detail::fmt;
    return "perforated" + std::to_string(dim_) + "(" + fmt(s.eps) + "," + fmt(s.hole_fraction) + "," +
           (s.hole == HoleShape::box ? "box" : "ball") + "," + key_impl(BoxShape{s.cell}) + "," +
           key_impl(BoxShape{s.base}) + ")";
  }
  std::string key_impl(const MappedShape& s) const { return "mapped(" + s.base->key() + "," + s.map.describe() + ")"; }
  std::string key_impl(const PolygonShape& s) const {
    std::string k = "polygon(";
    for (const auto& v : s.vertices) k += detail::fmt(v[0]) + "," + detail::fmt(v[1]) + ";";
    return k + ")";
  }

  // -- measures ------------------------------------------------------------
  MeasureEstimate subcell(const Box& b) const {
    const auto r = detail::subcell_measure([this](const Point& x) { return contains(x); }, b, dim_);
    return {r.value, r.change, false};
  }
  MeasureEstimate measure_impl(const BoxShape& s) const {
    return {dim_ == 1 ? s.box.side(0) : s.box.side(0) * s.box.side(1), 0.0, true};
  }
  MeasureEstimate measure_impl(const BallShape& s) const {
    return {dim_ == 1 ? 2.0 * s.radius : kPi * s.radius * s.radius, 0.0, true};
  }
  MeasureEstimate measure_impl(const UnionOfBallsShape& s) const {
    double m = 0.0;
    for (const auto& b : s.balls) m += measure_impl(b).value;
    return {m, 0.0, true};
  }
  // Integral of sin(2 pi n x) over whole periods vanishes.
  MeasureEstimate measure_impl(const RoughShape&) const { return {1.0, 0.0, true}; }
  MeasureEstimate measure_impl(const PerforatedShape& s) const {
    bool aligned = true;
    for (int a = 0; a < dim_; ++a) {
      const double l = s.eps * s.cell.side(a);
      aligned = aligned && detail::near_integer(s.base.lo[a] / l) && detail::near_integer(s.base.hi[a] / l);
    }
    if (aligned) return {measure_impl(BoxShape{s.base}).value * (1.0 - s.hole_fraction), 0.0, true};
    return subcell(bbox_impl(s));
  }
  MeasureEstimate measure_impl(const MappedShape& s) const {
    const MeasureEstimate base = s.base->measure_estimate();
    switch (s.map.kind) {
      case MapKind::affine_diagonal: {
        const double j = dim_ == 1 ? std::fabs(s.map.scales[0]) : std::fabs(s.map.scales[0] * s.map.scales[1]);
        return {base.value * j, base.std_error * j, base.exact};
      }
      case MapKind::dilation: {
        const double j = std::pow(std::fabs(s.map.factor), dim_);
        return {base.value * j, base.std_error * j, base.exact};
      }
      case MapKind::perturbation_field: break;
    }
    return subcell(bbox_impl(s));
  }
  MeasureEstimate measure_impl(const PolygonShape& s) const {
    return {std::fabs(detail::polygon_signed_area(s.vertices)), 0.0, true};
  }

  int dim_;
  Shape shape_;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

inline double measure(const DomainSpec& d) { return d.measure(); }

/// |d1 \ d2| + |d2 \ d1| with provenance.
struct SymmetricDifference {
  double value = 0.0;           // closed form when available, else the subcell estimate
  double subcell_estimate = 0.0;
  double subcell_change = 0.0;  // difference between the last two refinements
  bool closed_form = false;
  bool flagged = false;         // closed form and subcell estimate disagree by more than 1e-3
};

namespace detail {
inline bool is_unit_square(const DomainSpec& d) {
  auto b = std::get_if<BoxShape>(&d.shape());
  return d.dim() == 2 && b && b->box == Box{{0.0, 0.0}, {1.0, 1.0}};
}

inline SubcellResult subcell_symdiff(const DomainSpec& a, const DomainSpec& b) {
  const Box box = hull(a.bounding_box(), b.bounding_box());
  return subcell_measure([&](const Point& x) { return a.contains(x) != b.contains(x); }, box, a.dim());
}

inline double box_overlap(const Box& a, const Box& b, int dim) {
  double v = 1.0;
  for (int k = 0; k < dim; ++k) v *= std::max(0.0, std::min(a.hi[k], b.hi[k]) - std::max(a.lo[k], b.lo[k]));
  return v;
}
}  // namespace detail

inline SymmetricDifference symmetric_difference(const DomainSpec& d1, const DomainSpec& d2,
                                                bool with_subcell_check = true) {
  if (d1.dim() != d2.dim()) throw Error("domain", "same_dim", "symmetric difference of domains of different dim");
  SymmetricDifference out;
  if (d1.key() == d2.key()) {
    out.closed_form = true;
    return out;
  }
  const RoughShape* rough = std::get_if<RoughShape>(&d1.shape());
  if (!rough) rough = std::get_if<RoughShape>(&d2.shape());
  const bool rough_vs_square = rough && (detail::is_unit_square(d1) || detail::is_unit_square(d2));
  const auto* b1 = std::get_if<BallShape>(&d1.shape());
  const auto* b2 = std::get_if<BallShape>(&d2.shape());
  const auto* x1 = std::get_if<BoxShape>(&d1.shape());
  const auto* x2 = std::get_if<BoxShape>(&d2.shape());

  if (rough_vs_square) {
    // integral over (0,1) of |sin(2 pi n x)| / n
    out.value = 2.0 / (kPi * rough->n);
    out.closed_form = true;
  } else if (b1 && b2 && b1->center == b2->center) {
    out.value = std::fabs(d1.measure() - d2.measure());
    out.closed_form = true;
  } else if (x1 && x2) {
    out.value = d1.measure() + d2.measure() - 2.0 * detail::box_overlap(x1->box, x2->box, d1.dim());
    out.closed_form = true;
  }

  if (!out.closed_form || with_subcell_check) {
    const auto est = detail::subcell_symdiff(d1, d2);
    out.subcell_estimate = est.value;
    out.subcell_change = est.change;
    if (!out.closed_form) out.value = est.value;
    else out.flagged = std::fabs(est.value - out.value) > 1e-3;
  }
  return out;
}

inline double symmetric_difference_measure(const DomainSpec& d1, const DomainSpec& d2) {
  return symmetric_difference(d1, d2, false).value;
}

namespace detail {
inline void add_segment_samples(std::vector<BoundarySample>& out, Point a, Point b, Point normal, int m) {
  const Point d = b - a;
  const double len = norm(d);
  for (int k = 0; k < m; ++k) out.push_back({a + ((k + 0.5) / m) * d, normal, len / m});
}

inline void add_polyline(std::vector<BoundarySample>& out, const std::vector<Point>& v, int m) {
  const double orient = polygon_signed_area(v) > 0.0 ? 1.0 : -1.0;
  double perimeter = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) perimeter += norm(v[(i + 1) % v.size()] - v[i]);
  int used = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point a = v[i];
    const Point b = v[(i + 1) % v.size()];
    const Point d = b - a;
    const double len = norm(d);
    int me = i + 1 == v.size() ? m - used : static_cast<int>(std::lround(m * len / perimeter));
    me = std::max(me, 1);
    used += me;
    // counterclockwise polygons have the outward normal on the right of each edge
    const Point n = (orient / len) * Point{d[1], -d[0]};
    add_segment_samples(out, a, b, n, me);
  }
}

inline void add_interval_ends(std::vector<BoundarySample>& out, double a, double b) {
  out.push_back({{a, 0.0}, {-1.0, 0.0}, 1.0});
  out.push_back({{b, 0.0}, {1.0, 0.0}, 1.0});
}
}  // namespace detail

/// Boundary points with outward unit normals and arc-length weights.
/// In 1-D the boundary is the two endpoints with unit (counting) weight.
inline BoundaryQuadrature boundary_quadrature(const DomainSpec& d, int m) {
  if (d.dim() == 2 && m < 8) throw Error("domain", "enough_samples", "boundary quadrature needs m >= 8");
  BoundaryQuadrature q;
  const auto& shape = d.shape();
  if (auto b = std::get_if<BallShape>(&shape)) {
    if (d.dim() == 1) {
      detail::add_interval_ends(q.samples, b->center[0] - b->radius, b->center[0] + b->radius);
      return q;
    }
    for (int k = 0; k < m; ++k) {
      const double th = 2.0 * kPi * k / m;
      const Point n{std::cos(th), std::sin(th)};
      q.samples.push_back({b->center + b->radius * n, n, 2.0 * kPi * b->radius / m});
    }
    return q;
  }
  if (auto x = std::get_if<BoxShape>(&shape)) {
    const Box& bx = x->box;
    if (d.dim() == 1) {
      detail::add_interval_ends(q.samples, bx.lo[0], bx.hi[0]);
      return q;
    }
    detail::add_polyline(q.samples, {bx.lo, {bx.hi[0], bx.lo[1]}, bx.hi, {bx.lo[0], bx.hi[1]}}, m);
    q.c1 = false;
    return q;
  }
  if (auto p = std::get_if<PolygonShape>(&shape)) {
    detail::add_polyline(q.samples, p->vertices, m);
    q.c1 = false;
    return q;
  }
  if (auto u = std::get_if<UnionOfBallsShape>(&shape)) {
    for (const auto& ball : u->balls) {
      auto part = boundary_quadrature(DomainSpec(d.dim(), ball), std::max(8, m / static_cast<int>(u->balls.size())));
      q.samples.insert(q.samples.end(), part.samples.begin(), part.samples.end());
    }
    return q;
  }
  if (auto mp = std::get_if<MappedShape>(&shape)) {
    BoundaryQuadrature base = boundary_quadrature(*mp->base, m);
    q.c1 = base.c1;
    for (const auto& s : base.samples) {
      const Jacobian j = mp->map.jacobian(s.x);
      const double det = mp->map.jacobian_det(s.x);
      if (d.dim() == 1) {
        q.samples.push_back({mp->map.apply(s.x), {j[0] > 0 ? s.normal[0] : -s.normal[0], 0.0}, 1.0});
        continue;
      }
      // Nanson: n da = det(Dh) Dh^{-T} N dA
      const double sdet = j[0] * j[3] - j[1] * j[2];
      const Point cof{(j[3] * s.normal[0] - j[2] * s.normal[1]) / sdet,
                      (-j[1] * s.normal[0] + j[0] * s.normal[1]) / sdet};
      const double len = norm(cof);
      q.samples.push_back({mp->map.apply(s.x), (1.0 / len) * cof, s.weight * det * len});
    }
    return q;
  }
  throw Error("domain", "boundary_parameterization",
              "domain '" + d.key() + "' has no boundary parameterization");
}

/// Ball centered at the origin with the same measure as d.
inline DomainSpec ball_of_same_measure(const DomainSpec& d) {
  const double m = d.measure();
  if (!(m > 0.0)) throw Error("domain", "positive_measure", "cannot match a zero-measure domain");
  const double r = d.dim() == 1 ? 0.5 * m : std::sqrt(m / kPi);
  return DomainSpec::ball({0.0, 0.0}, r, d.dim());
}

/// Sampled injectivity and Jacobian positivity of a map over a box.
struct MapCheck {
  double min_stretch = 0.0;  // min |h(x) - h(y)| / |x - y| over sample pairs
  double min_det = 0.0;
  bool ok() const { return min_stretch > 0.0 && min_det > 0.0; }
};

inline MapCheck check_map(const MapSpec& m, const Box& box, int samples = 24) {
  std::vector<Point> pts;
  const int ny = m.dim == 1 ? 1 : samples;
  for (int i = 0; i < samples; ++i)
    for (int j = 0; j < ny; ++j)
      pts.push_back({box.lo[0] + box.side(0) * (i + 0.5) / samples,
                     m.dim == 1 ? 0.0 : box.lo[1] + box.side(1) * (j + 0.5) / ny});
  MapCheck c{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  std::vector<Point> img(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    img[i] = m.apply(pts[i]);
    c.min_det = std::min(c.min_det, m.signed_det(pts[i]));
  }
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      c.min_stretch = std::min(c.min_stretch, norm(img[i] - img[j]) / norm(pts[i] - pts[j]));
  return c;
}

}  // namespace nlspec

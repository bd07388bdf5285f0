#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <iterator>
#include <limits>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "nlspec/domain.hpp"
#include "nlspec/error.hpp"
#include "nlspec/kernel.hpp"
#include "nlspec/linalg.hpp"
#include "nlspec/parallel.hpp"

namespace nlspec {

/// Uniform cell-centered grid over a container box D. Cell faces lie on
/// the global lattice h*Z, so grids with equal h share node coordinates.
class ContainerGrid {
 public:
  /// Grid over lattice cells [first[a], first[a] + counts[a]) per axis.
  ContainerGrid(int dim, double h, std::array<long, 2> first, std::array<long, 2> counts)
      : dim_(dim), h_(h), first_(first), counts_(counts) {
    if (!(h > 0.0)) throw Error("operator", "positive_spacing", "grid spacing must be positive");
    if (dim == 1) {
      first_[1] = 0;
      counts_[1] = 1;
    }
    for (int a = 0; a < dim; ++a)
      if (counts_[a] <= 0) throw Error("operator", "nonempty_grid", "grid has no cells");
  }

  /// Smallest lattice-aligned grid containing every domain's bounding
  /// box with at least margin_cells empty cells on each side.
  static ContainerGrid covering(const std::vector<DomainSpec>& domains, double h, int margin_cells = 1) {
    if (domains.empty()) throw Error("operator", "registered_domains", "no domains to cover");
    const int dim = domains.front().dim();
    Box box = domains.front().bounding_box();
    for (const auto& d : domains) {
      if (d.dim() != dim) throw Error("operator", "same_dim", "domains of different dimension");
      box = hull(box, d.bounding_box());
    }
    return covering_box(box, dim, h, margin_cells);
  }

  static ContainerGrid covering_box(const Box& box, int dim, double h, int margin_cells = 1) {
    std::array<long, 2> first{0, 0}, counts{1, 1};
    for (int a = 0; a < dim; ++a) {
      const long lo = static_cast<long>(std::floor(box.lo[a] / h + 1e-9)) - margin_cells;
      const long hi = static_cast<long>(std::ceil(box.hi[a] / h - 1e-9)) + margin_cells;
      first[a] = lo;
      counts[a] = hi - lo;
    }
    return ContainerGrid(dim, h, first, counts);
  }

  int dim() const noexcept { return dim_; }
  double h() const noexcept { return h_; }
  double cell_weight() const noexcept { return dim_ == 1 ? h_ : h_ * h_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(counts_[0] * counts_[1]); }
  std::array<long, 2> counts() const noexcept { return counts_; }

  Box bbox() const {
    Box b{{first_[0] * h_, first_[1] * h_}, {(first_[0] + counts_[0]) * h_, (first_[1] + counts_[1]) * h_}};
    if (dim_ == 1) b.lo[1] = b.hi[1] = 0.0;
    return b;
  }

  /// Center of node idx; nodes are ordered lexicographically with the
  /// first axis slowest.
  Point node(std::size_t idx) const {
    const long i = static_cast<long>(idx) / counts_[1];
    const long j = static_cast<long>(idx) % counts_[1];
    return {(first_[0] + i + 0.5) * h_, dim_ == 1 ? 0.0 : (first_[1] + j + 0.5) * h_};
  }

  /// True when box lies inside D with at least margin_cells of clearance.
  bool holds(const Box& box, int margin_cells = 0) const {
    const Box b = bbox();
    const double pad = margin_cells * h_ * (1.0 - 1e-9);
    for (int a = 0; a < dim_; ++a)
      if (box.lo[a] < b.lo[a] + pad || box.hi[a] > b.hi[a] - pad) return false;
    return true;
  }

  bool operator==(const ContainerGrid&) const = default;

 private:
  int dim_;
  double h_;
  std::array<long, 2> first_;
  std::array<long, 2> counts_;
};

/// Spacing and empty-cell margin from which covering grids are built.
struct GridSpec {
  double h = 1.0 / 32.0;
  int margin = 1;

  GridSpec(double spacing = 1.0 / 32.0, int margin_cells = 1) : h(spacing), margin(margin_cells) {}

  ContainerGrid cover(const std::vector<DomainSpec>& domains) const { return ContainerGrid::covering(domains, h, margin); }
  GridSpec coarse() const { return {2.0 * h, margin}; }
};

/// Nystrom (midpoint) discretization of J_Omega on a container grid.
/// K(i, j) = J(x_i - x_j) h^N over active nodes, i.e. nodes whose centers
/// lie in Omega.
struct DiscreteOperator {
  std::shared_ptr<const ContainerGrid> grid;
  KernelSpec kernel;
  DomainSpec domain;
  std::vector<std::size_t> active;
  Matrix K;

  std::size_t size() const noexcept { return active.size(); }
  double cell_weight() const { return grid->cell_weight(); }
  /// |Omega| as seen by the grid: active count times cell weight.
  double grid_measure() const { return static_cast<double>(active.size()) * cell_weight(); }

  std::vector<Point> active_nodes() const {
    std::vector<Point> pts(active.size());
    for (std::size_t i = 0; i < active.size(); ++i) pts[i] = grid->node(active[i]);
    return pts;
  }

  double trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < K.rows(); ++i) t += K(i, i);
    return t;
  }

  /// Zero extension to the whole container (the discrete tilde-J_Omega).
  Matrix container_matrix() const {
    Matrix c(grid->size(), grid->size());
    for (std::size_t i = 0; i < active.size(); ++i)
      for (std::size_t j = 0; j < active.size(); ++j) c(active[i], active[j]) = K(i, j);
    return c;
  }
};

namespace detail {
inline double kernel_entry(const KernelSpec& k, const Point& a, const Point& b, double cutoff2) {
  const double r2 = norm2(a - b);
  return r2 >= cutoff2 ? 0.0 : k.value_sq(r2);
}

/// Symmetric matrix J(p_i - p_j) * scale, filled row-parallel and mirrored.
inline Matrix kernel_matrix(const KernelSpec& k, const std::vector<Point>& pts, double scale) {
  const std::size_t n = pts.size();
  Matrix m(n, n);
  const double rc = k.cutoff_radius();
  const double cutoff2 = k.family == KernelFamily::gaussian ? rc * rc : std::numeric_limits<double>::infinity();
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = i; j < n; ++j) m(i, j) = kernel_entry(k, pts[i], pts[j], cutoff2) * scale;
  });
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) m(j, i) = m(i, j);
  return m;
}
}  // namespace detail

inline DiscreteOperator assemble(const KernelSpec& k, const DomainSpec& d, std::shared_ptr<const ContainerGrid> g) {
  if (k.dim != d.dim() || g->dim() != d.dim())
    throw Error("operator", "same_dim", "kernel, domain and grid dimensions differ");
  if (d.measure() > 0.0 && !g->holds(d.bounding_box()))
    throw Error("operator", "container_overflow", "domain '" + d.key() + "' does not fit inside the container");
  DiscreteOperator op{g, k, d, {}, {}};
  for (std::size_t idx = 0; idx < g->size(); ++idx)
    if (d.contains(g->node(idx))) op.active.push_back(idx);
  if (op.active.empty())
    throw Error("operator", "nonempty_active_set",
                "no grid node lies in '" + d.key() + "'; refine the grid (smaller h)");
  op.K = detail::kernel_matrix(k, op.active_nodes(), g->cell_weight());
  return op;
}

inline DiscreteOperator assemble(const KernelSpec& k, const DomainSpec& d, const ContainerGrid& g) {
  return assemble(k, d, std::make_shared<const ContainerGrid>(g));
}

/// Container-form difference K~_a - K~_b restricted to the union of the
/// active sets (it vanishes elsewhere).
inline Matrix difference_matrix(const DiscreteOperator& a, const DiscreteOperator& b) {
  if (!(*a.grid == *b.grid)) throw Error("operator", "same_grid", "operators live on different container grids");
  if (!(a.kernel == b.kernel)) throw Error("operator", "same_kernel", "operators use different kernels");
  std::vector<std::size_t> uni;
  std::set_union(a.active.begin(), a.active.end(), b.active.begin(), b.active.end(), std::back_inserter(uni));
  const std::size_t n = uni.size();
  std::vector<signed char> in_a(n, 0), in_b(n, 0);
  for (std::size_t i = 0, ia = 0, ib = 0; i < n; ++i) {
    if (ia < a.active.size() && a.active[ia] == uni[i]) in_a[i] = 1, ++ia;
    if (ib < b.active.size() && b.active[ib] == uni[i]) in_b[i] = 1, ++ib;
  }
  std::vector<Point> pts(n);
  for (std::size_t i = 0; i < n; ++i) pts[i] = a.grid->node(uni[i]);
  Matrix d = detail::kernel_matrix(a.kernel, pts, a.cell_weight());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d(i, j) *= static_cast<double>(in_a[i] * in_a[j] - in_b[i] * in_b[j]);
  return d;
}

/// Spectral norm of the container-form difference, the discrete
/// ||J~_{Omega_1} - J~_{Omega_2}||_{L^2(D)}.
inline double operator_norm_diff(const DiscreteOperator& a, const DiscreteOperator& b) {
  Matrix d = difference_matrix(a, b);
  if (d.rows() == 0) return 0.0;
  const auto w = linalg::symmetric_eigenvalues(std::move(d));
  return std::max(std::fabs(w.front()), std::fabs(w.back()));
}

/// sqrt(2) ||J||_inf sqrt(|O1 u O2| + |O1| + |O2|) sqrt(|O1 \ O2| + |O2 \ O1|).
inline double lipschitz_bound(const KernelSpec& k, const DomainSpec& d1, const DomainSpec& d2) {
  const double s = symmetric_difference_measure(d1, d2);
  const double m1 = d1.measure();
  const double m2 = d2.measure();
  const double uni = 0.5 * (m1 + m2 + s);
  return std::sqrt(2.0) * k.sup_norm() * std::sqrt(uni + m1 + m2) * std::sqrt(s);
}

namespace detail {
inline void put_u32(std::ostream& os, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) os.put(static_cast<char>((v >> (8 * b)) & 0xffu));
}
inline void put_f64(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  for (int b = 0; b < 8; ++b) os.put(static_cast<char>((bits >> (8 * b)) & 0xffu));
}
}  // namespace detail

/// Binary dump: "NLSP", u32 n, u32 dim, u32 reserved (0), then n*n
/// little-endian doubles row-major.
inline void write_binary(const DiscreteOperator& op, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("operator", "writable_path", "cannot open '" + path + "'");
  os.write("NLSP", 4);
  detail::put_u32(os, static_cast<std::uint32_t>(op.K.rows()));
  detail::put_u32(os, static_cast<std::uint32_t>(op.grid->dim()));
  detail::put_u32(os, 0);
  for (std::size_t k = 0; k < op.K.rows() * op.K.cols(); ++k) detail::put_f64(os, op.K.data()[k]);
  if (!os) throw Error("operator", "writable_path", "write to '" + path + "' failed");
}

}  // namespace nlspec

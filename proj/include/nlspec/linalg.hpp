#pragma once

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "nlspec/error.hpp"

namespace nlspec {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline std::vector<double> multiply(const Matrix& a, std::span<const double> x) {
  std::vector<double> y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x);
  return y;
}

inline double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.rows() * a.cols(); ++k) s += a.data()[k] * a.data()[k];
  return std::sqrt(s);
}

inline bool is_symmetric(const Matrix& a) {
  if (a.rows() != a.cols()) return false;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      if (a(i, j) != a(j, i)) return false;
  return true;
}

/// Eigenvalues with a subset of eigenvectors. vectors.row(k) is the unit
/// (Euclidean) eigenvector of values[index[k]].
struct EigenPairs {
  std::vector<double> values;
  std::vector<std::size_t> index;
  Matrix vectors;
  int sweeps = 0;
};

namespace linalg {

struct JacobiOptions {
  double tolerance = 1e-12;  // off-diagonal Frobenius norm relative to ||A||_F
  int max_sweeps = 30;
};

/// Cyclic Jacobi rotations on a dense symmetric matrix. Returns all
/// eigenvalues (unsorted, diagonal order) and all eigenvectors.
inline EigenPairs jacobi_eigen(Matrix a, const JacobiOptions& opt = {}) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw Error("spectral", "square_matrix", "Jacobi needs a square matrix");
  Matrix vt = Matrix::identity(n);  // rows are eigenvectors
  const double frob = frobenius_norm(a);
  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  int sweep = 0;
  double off = off_norm();
  while (off > opt.tolerance * frob) {
    if (sweep == opt.max_sweeps)
      throw Error("spectral", "jacobi_convergence",
                  "no convergence after " + std::to_string(sweep) +
                      " sweeps; off-diagonal residual " + std::to_string(off / frob));
    ++sweep;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        double* rp = a.row(p).data();
        double* rq = a.row(q).data();
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double x = rp[k];
          const double y = rq[k];
          rp[k] = c * x - s * y;
          rq[k] = s * x + c * y;
        }
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          a(k, p) = rp[k];
          a(k, q) = rq[k];
        }
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;

        double* vp = vt.row(p).data();
        double* vq = vt.row(q).data();
        for (std::size_t k = 0; k < n; ++k) {
          const double x = vp[k];
          const double y = vq[k];
          vp[k] = c * x - s * y;
          vq[k] = s * x + c * y;
        }
      }
    }
    off = off_norm();
  }

  EigenPairs out;
  out.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.values[i] = a(i, i);
  out.index.resize(n);
  std::iota(out.index.begin(), out.index.end(), std::size_t{0});
  out.vectors = std::move(vt);
  out.sweeps = sweep;
  return out;
}

namespace detail {
inline void check_info(lapack_int info, const char* routine) {
  if (info != 0)
    throw Error("spectral", "lapack_" + std::string(routine),
                "returned info = " + std::to_string(info));
}
}  // namespace detail

/// All eigenvalues of a dense symmetric matrix, ascending.
inline std::vector<double> symmetric_eigenvalues(Matrix a) {
  const auto n = static_cast<lapack_int>(a.rows());
  std::vector<double> w(a.rows());
  if (n == 0) return w;
  detail::check_info(LAPACKE_dsyevd(LAPACK_ROW_MAJOR, 'N', 'U', n, a.data(), n, w.data()), "dsyevd");
  return w;
}

/// All eigenvalues (ascending) plus eigenvectors for the `count` largest
/// in magnitude. Tridiagonalizes once and back-transforms only the
/// eigenvectors at the two ends of the spectrum that cover them.
inline EigenPairs symmetric_eigen_leading(Matrix a, std::size_t count) {
  const std::size_t n = a.rows();
  EigenPairs out;
  if (n == 0) return out;
  count = std::min(count, n);
  const auto ln = static_cast<lapack_int>(n);

  std::vector<double> d(n), e(n, 0.0), tau(n > 1 ? n - 1 : 1);
  // Row-major symmetric storage is its own column-major transpose.
  detail::check_info(LAPACKE_dsytrd(LAPACK_COL_MAJOR, 'L', ln, a.data(), ln, d.data(), e.data(), tau.data()),
                     "dsytrd");

  out.values = d;
  {
    std::vector<double> e2 = e;
    detail::check_info(LAPACKE_dsterf(ln, out.values.data(), e2.data()), "dsterf");
  }

  // Leading |mu| values occupy a prefix (negatives) and a suffix (positives).
  std::size_t top = 0, bottom = 0;
  for (std::size_t taken = 0; taken < count; ++taken) {
    const double lo = out.values[bottom];
    const double hi = out.values[n - 1 - top];
    if (std::fabs(hi) >= std::fabs(lo)) ++top;
    else ++bottom;
  }

  const std::size_t m = top + bottom;
  out.vectors = Matrix(m, n);
  if (m == 0) return out;

  // Column-major n x m block of tridiagonal eigenvectors, back-transformed in place.
  std::vector<double> z(n * m, 0.0);
  auto solve_range = [&](lapack_int il, lapack_int iu, std::size_t col0) {
    std::vector<double> dd = d, ee = e, w(n);
    std::vector<lapack_int> support(2 * n);
    lapack_int found = 0;
    lapack_logical tryrac = 1;
    detail::check_info(LAPACKE_dstemr(LAPACK_COL_MAJOR, 'V', 'I', ln, dd.data(), ee.data(), 0.0, 0.0, il, iu,
                                      &found, w.data(), z.data() + col0 * n, ln, iu - il + 1, support.data(), &tryrac),
                       "dstemr");
    if (found != iu - il + 1) throw Error("spectral", "lapack_dstemr", "unexpected eigenpair count");
    for (lapack_int k = 0; k < found; ++k) out.index.push_back(static_cast<std::size_t>(il - 1 + k));
  };
  if (bottom > 0) solve_range(1, static_cast<lapack_int>(bottom), 0);
  if (top > 0) solve_range(static_cast<lapack_int>(n - top + 1), ln, bottom);

  if (n > 1)
    detail::check_info(LAPACKE_dormtr(LAPACK_COL_MAJOR, 'L', 'L', 'N', ln, static_cast<lapack_int>(m), a.data(), ln,
                                      tau.data(), z.data(), ln),
                       "dormtr");
  for (std::size_t k = 0; k < m; ++k)
    std::copy(z.begin() + static_cast<std::ptrdiff_t>(k * n), z.begin() + static_cast<std::ptrdiff_t>((k + 1) * n),
              out.vectors.row(k).begin());
  return out;
}

}  // namespace linalg
}  // namespace nlspec

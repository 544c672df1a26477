#ifndef NBSCREEN_SVD_HPP
#define NBSCREEN_SVD_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "nbscreen/errors.hpp"

namespace nbscreen::linalg {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  const std::vector<double>& data() const noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline Matrix multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ArgumentError("matrix shapes do not conform");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

inline double frobenius_norm(const Matrix& m) noexcept {
  double s = 0.0;
  for (double v : m.data()) s += v * v;
  return std::sqrt(s);
}

/// Thin SVD: M (m x n) = U diag(sigma) V^T with k = min(m, n) columns in U
/// and V, sigma non-increasing.
struct Svd {
  Matrix u;
  std::vector<double> sigma;
  Matrix v;
};

struct JacobiOptions {
  double tolerance = 1e-12;  ///< relative column-pair correlation that counts as orthogonal
  int max_sweeps = 100;
};

namespace detail {

using Columns = std::vector<std::vector<double>>;

inline double dot(const std::vector<double>& a, const std::vector<double>& b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Fills the columns of `basis` flagged in `missing` with unit vectors
/// orthogonal to all others (Gram-Schmidt against the canonical basis).
inline void complete_orthonormal(Columns& basis, const std::vector<bool>& missing) {
  const std::size_t dim = basis.empty() ? 0 : basis.front().size();
  std::size_t next_axis = 0;
  for (std::size_t j = 0; j < basis.size(); ++j) {
    if (!missing[j]) continue;
    while (next_axis < dim) {
      std::vector<double> cand(dim, 0.0);
      cand[next_axis++] = 1.0;
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t o = 0; o < basis.size(); ++o) {
          if (o == j || (missing[o] && o > j)) continue;
          const double d = dot(cand, basis[o]);
          for (std::size_t i = 0; i < dim; ++i) cand[i] -= d * basis[o][i];
        }
      const double norm = std::sqrt(dot(cand, cand));
      if (norm > 1e-6) {
        for (auto& x : cand) x /= norm;
        basis[j] = std::move(cand);
        break;
      }
    }
  }
}

/// One-sided (Hestenes) Jacobi on a tall matrix (rows >= cols).
inline Svd jacobi_tall(const Matrix& m, const JacobiOptions& opt) {
  const std::size_t rows = m.rows(), cols = m.cols();
  Columns a(cols, std::vector<double>(rows));
  Columns v(cols, std::vector<double>(cols, 0.0));
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t i = 0; i < rows; ++i) a[j][i] = m(i, j);
    v[j][j] = 1.0;
  }

  for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < cols; ++p)
      for (std::size_t q = p + 1; q < cols; ++q) {
        const double alpha = dot(a[p], a[p]);
        const double beta = dot(a[q], a[q]);
        const double gamma = dot(a[p], a[q]);
        if (gamma == 0.0 || std::abs(gamma) <= opt.tolerance * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < rows; ++i) {
          const double x = a[p][i], y = a[q][i];
          a[p][i] = c * x - s * y;
          a[q][i] = s * x + c * y;
        }
        for (std::size_t i = 0; i < cols; ++i) {
          const double x = v[p][i], y = v[q][i];
          v[p][i] = c * x - s * y;
          v[q][i] = s * x + c * y;
        }
      }
    if (!rotated) break;
  }

  std::vector<double> norms(cols);
  for (std::size_t j = 0; j < cols; ++j) norms[j] = std::sqrt(dot(a[j], a[j]));
  std::vector<std::size_t> order(cols);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto l, auto r) { return norms[l] > norms[r]; });

  const double top = cols ? norms[order.front()] : 0.0;
  const double rank_floor = top * static_cast<double>(std::max(rows, cols)) * 1e-15;

  Columns u(cols), vs(cols);
  std::vector<bool> missing(cols, false);
  Svd out;
  out.sigma.resize(cols);
  for (std::size_t k = 0; k < cols; ++k) {
    const auto j = order[k];
    out.sigma[k] = norms[j];
    vs[k] = v[j];
    if (norms[j] > rank_floor && norms[j] > 0.0) {
      u[k] = a[j];
      for (auto& x : u[k]) x /= norms[j];
    } else {
      u[k].assign(rows, 0.0);
      missing[k] = true;
    }
  }
  complete_orthonormal(u, missing);

  out.u = Matrix(rows, cols);
  out.v = Matrix(cols, cols);
  for (std::size_t k = 0; k < cols; ++k) {
    for (std::size_t i = 0; i < rows; ++i) out.u(i, k) = u[k][i];
    for (std::size_t i = 0; i < cols; ++i) out.v(i, k) = vs[k][i];
  }
  return out;
}

}  // namespace detail

/// Thin singular value decomposition by one-sided Jacobi rotations. Meant for
/// desk-scale matrices. Throws NumericError on non-finite input.
inline Svd svd_small(const Matrix& m, const JacobiOptions& opt = {}) {
  for (double x : m.data())
    if (!std::isfinite(x)) throw NumericError("svd input contains a non-finite entry");
  if (m.rows() >= m.cols()) return detail::jacobi_tall(m, opt);
  auto t = detail::jacobi_tall(m.transposed(), opt);
  return {std::move(t.v), std::move(t.sigma), std::move(t.u)};
}

/// U diag(sigma) V^T.
inline Matrix reconstruct(const Svd& s) {
  Matrix us = s.u;
  for (std::size_t i = 0; i < us.rows(); ++i)
    for (std::size_t k = 0; k < us.cols(); ++k) us(i, k) *= s.sigma[k];
  return multiply(us, s.v.transposed());
}

}  // namespace nbscreen::linalg

#endif  // NBSCREEN_SVD_HPP

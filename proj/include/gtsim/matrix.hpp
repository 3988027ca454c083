#pragma once

// Dense row-major matrices and the few vector helpers the simulator needs.
// Everything here is sized for desk-scale problems (dimensions up to a few
// hundred), so plain loops are used throughout.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "gtsim/errors.hpp"

namespace gtsim {

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

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool operator==(const Matrix& o) const = default;

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

inline double norm_sq(std::span<const double> a) { return dot(a, a); }
inline double norm(std::span<const double> a) { return std::sqrt(norm_sq(a)); }

// c = a*b, accumulation in row order of b (deterministic for a fixed layout).
inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ShapeError("matmul: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

inline double max_abs(const Matrix& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j)));
  return m;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
  return m;
}

inline double frobenius_sq(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) s += norm_sq(a.row(i));
  return s;
}

inline bool all_finite(const Matrix& a) {
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (!std::isfinite(a(i, j))) return false;
  return true;
}

// Column means, i.e. the network average when rows are agent states.
inline std::vector<double> row_mean(const Matrix& a) {
  std::vector<double> mean(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) mean[j] += a(i, j);
  for (double& v : mean) v /= static_cast<double>(a.rows());
  return mean;
}

// Solves m*x = rhs for symmetric positive definite m via Cholesky.
// Throws RankDeficientError when a pivot is not safely positive.
inline std::vector<double> solve_spd(Matrix m, std::vector<double> rhs) {
  const std::size_t n = m.rows();
  if (m.cols() != n || rhs.size() != n) throw ShapeError("solve_spd: size mismatch");
  double scale = max_abs(m);
  for (std::size_t j = 0; j < n; ++j) {
    double d = m(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= m(j, k) * m(j, k);
    if (!(d > 1e-14 * std::max(scale, 1.0)))
      throw RankDeficientError("solve_spd: matrix is singular or not positive definite");
    const double l = std::sqrt(d);
    m(j, j) = l;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = m(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= m(i, k) * m(j, k);
      m(i, j) = v / l;
    }
  }
  // forward then backward substitution
  for (std::size_t i = 0; i < n; ++i) {
    double v = rhs[i];
    for (std::size_t k = 0; k < i; ++k) v -= m(i, k) * rhs[k];
    rhs[i] = v / m(i, i);
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double v = rhs[ii];
    for (std::size_t k = ii + 1; k < n; ++k) v -= m(k, ii) * rhs[k];
    rhs[ii] = v / m(ii, ii);
  }
  return rhs;
}

}  // namespace gtsim

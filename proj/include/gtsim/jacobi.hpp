#pragma once

// Cyclic Jacobi eigensolver for dense symmetric matrices. Adequate and
// dependency-free at the sizes used here (n up to a few hundred);
// convergence is declared when the off-diagonal Frobenius norm drops
// below the requested tolerance.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "gtsim/errors.hpp"
#include "gtsim/matrix.hpp"

namespace gtsim {

struct EigenDecomposition {
  std::vector<double> eigenvalues;  // sorted descending
  Matrix eigenvectors;              // column i pairs with eigenvalues[i]
  int sweeps = 0;
};

inline double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

inline EigenDecomposition jacobi_eigen(const Matrix& input, double off_tol = 1e-12,
                                       int max_sweeps = 64) {
  const std::size_t n = input.rows();
  if (input.cols() != n) throw ShapeError("jacobi_eigen: matrix must be square");
  Matrix a = input;
  Matrix v = Matrix::identity(n);

  int sweeps = 0;
  while (off_diagonal_norm(a) >= off_tol) {
    if (++sweeps > max_sweeps)
      throw SpectrumError("jacobi_eigen: no convergence after " + std::to_string(max_sweeps) +
                          " sweeps");
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // rotation angle zeroing a(p,q); smaller-root formula for stability
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 1.0 / (2.0 * theta);
        } else {
          t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        const double app = a(p, p), aqq = a(q, q);
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double arp = a(r, p), arq = a(r, q);
          a(r, p) = c * arp - s * arq;
          a(p, r) = a(r, p);
          a(r, q) = s * arp + c * arq;
          a(q, r) = a(r, q);
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double vrp = v(r, p), vrq = v(r, q);
          v(r, p) = c * vrp - s * vrq;
          v(r, q) = s * vrp + c * vrq;
        }
      }
    }
  }

  EigenDecomposition dec;
  dec.sweeps = sweeps;
  dec.eigenvalues.resize(n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });
  dec.eigenvectors = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    dec.eigenvalues[i] = a(order[i], order[i]);
    for (std::size_t r = 0; r < n; ++r) dec.eigenvectors(r, i) = v(r, order[i]);
  }
  return dec;
}

}  // namespace gtsim

#pragma once

// Metropolis-Hastings mixing matrices and their spectral properties.
// The mixing rate lambda is the largest eigenvalue magnitude away from
// the Perron eigenvalue 1; lambda_bar = (1 + lambda)/2.

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "gtsim/errors.hpp"
#include "gtsim/graph.hpp"
#include "gtsim/jacobi.hpp"
#include "gtsim/matrix.hpp"

namespace gtsim {

struct SpectrumInfo {
  std::vector<double> eigenvalues;  // sorted descending
  double lambda = 0.0;
  double lambda_bar = 0.5;
};

// Eigenvalues of a symmetric matrix plus the mixing-rate summary.
// Throws SpectrumError when the input is not symmetric.
inline SpectrumInfo spectrum(const Matrix& w, double symmetry_tol = 1e-12) {
  const std::size_t n = w.rows();
  if (w.cols() != n) throw SpectrumError("spectrum: matrix must be square");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(w(i, j) - w(j, i)) > symmetry_tol)
        throw SpectrumError("spectrum: matrix is not symmetric");

  SpectrumInfo info;
  info.eigenvalues = jacobi_eigen(w).eigenvalues;
  if (n >= 2) {
    double lam = 0.0;
    for (std::size_t i = 1; i < n; ++i) lam = std::max(lam, std::abs(info.eigenvalues[i]));
    info.lambda = lam;
  }
  info.lambda_bar = (1.0 + info.lambda) / 2.0;
  return info;
}

class MixingMatrix {
 public:
  MixingMatrix(Matrix w, SpectrumInfo spectrum)
      : w_(std::move(w)), spectrum_(std::move(spectrum)) {}

  const Matrix& w() const { return w_; }
  std::size_t size() const { return w_.rows(); }
  double lambda() const { return spectrum_.lambda; }
  double lambda_bar() const { return spectrum_.lambda_bar; }
  const std::vector<double>& eigenvalues() const { return spectrum_.eigenvalues; }

 private:
  Matrix w_;
  SpectrumInfo spectrum_;
};

// Metropolis weights: w_ij = 1/(1 + max(deg_i, deg_j)) on edges, with the
// complementary self-weight. Symmetric and doubly stochastic by
// construction for any connected graph.
inline MixingMatrix metropolis_weights(const Graph& g) {
  const std::size_t n = g.n();
  Matrix w(n, n);
  for (auto [i, j] : g.edges()) {
    const double wij = 1.0 / (1.0 + static_cast<double>(std::max(g.degree(i), g.degree(j))));
    w(i, j) = wij;
    w(j, i) = wij;
  }
  for (std::size_t i = 0; i < n; ++i) {
    double off = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) off += w(i, j);
    w(i, i) = 1.0 - off;
  }
  return MixingMatrix(w, spectrum(w));
}

// Report-only check of the Assumption-1 properties of a raw matrix.
struct MixingValidation {
  double symmetry_defect = 0.0;   // max |w_ij - w_ji|
  double row_sum_defect = 0.0;    // max |sum_j w_ij - 1|
  double negativity_defect = 0.0; // max(0, -min_ij w_ij)
  double tol = 0.0;
  bool pass = false;
};

inline MixingValidation validate_mixing(const Matrix& w, double tol) {
  const std::size_t n = w.rows();
  if (w.cols() != n) throw ShapeError("validate_mixing: matrix must be square");
  MixingValidation r;
  r.tol = tol;
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      sum += w(i, j);
      r.symmetry_defect = std::max(r.symmetry_defect, std::abs(w(i, j) - w(j, i)));
      r.negativity_defect = std::max(r.negativity_defect, -std::min(0.0, w(i, j)));
    }
    r.row_sum_defect = std::max(r.row_sum_defect, std::abs(sum - 1.0));
  }
  r.pass = r.symmetry_defect <= tol && r.row_sum_defect <= tol && r.negativity_defect <= tol;
  return r;
}

}  // namespace gtsim

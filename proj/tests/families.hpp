#pragma once

// Small closed-form objective families used across the test suites.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "gtsim/objective.hpp"

namespace gtsim::testing {

// scalar quadratics f_i(x) = a_i (x - c_i)^2
struct ScalarQuadratics {
  std::vector<double> a, c;
  std::size_t num_agents() const { return a.size(); }
  std::size_t dim() const { return 1; }
  double value(std::size_t i, std::span<const double> x) const {
    return a[i] * (x[0] - c[i]) * (x[0] - c[i]);
  }
  void gradient(std::size_t i, std::span<const double> x, std::span<double> g) const {
    g[0] = 2.0 * a[i] * (x[0] - c[i]);
  }
  double smoothness() const {
    double m = 0.0;
    for (double v : a) m = std::max(m, 2.0 * v);
    return m;
  }
};
static_assert(ObjectiveFamily<ScalarQuadratics>);

// identical copies of one scalar quadratic (a homogeneous network)
inline ScalarQuadratics homogeneous_quadratics(std::size_t n, double a, double c) {
  return {std::vector<double>(n, a), std::vector<double>(n, c)};
}

}  // namespace gtsim::testing

#pragma once

// Pure calculators for the convergence theory: step-size admissibility,
// the rate upper bound, and the consensus-inequality constants. Used to
// gate experiment configs and as bound-vs-measurement diagnostics.

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "gtsim/errors.hpp"

namespace gtsim {

// Below this value a mixing rate is treated as exactly zero (perfect
// averaging); the consensus-contraction step-size conditions are then
// vacuous and only the descent condition on alpha binds.
inline constexpr double kLambdaZeroTol = 1e-12;

struct TheoryParams {
  double lambda = 0.0;  // mixing rate, in [0, 1)
  long T_o = 1;
  double eta = 0.0;
  double alpha = 0.0;
  double L = 1.0;
  std::size_t n = 1;
  long K = 1;
  double f_tilde_0 = 0.0;  // f(xbar^0) minus a lower bound on f*
  double zeta_0 = 0.0;
};

inline void check_lambda(double lambda) {
  if (!(lambda >= 0.0) || lambda >= 1.0)
    throw ConfigError("mixing rate must lie in [0, 1), got " + std::to_string(lambda));
}

inline double theta(double lambda, double eta, long T_o) {
  const double s = 1.0 + eta * static_cast<double>(T_o);
  return lambda * s * s;
}

// Supremum of admissible eta: min{1, (1 - sqrt(l)) / (sqrt(l) (1 + T_o))}.
// IEEE division gives +inf at lambda = 0, so the cap of 1 applies there.
inline double eta_max(double lambda, long T_o) {
  check_lambda(lambda);
  if (T_o < 1) throw ConfigError("eta_max: T_o must be at least 1");
  const double sq = std::sqrt(lambda);
  return std::min(1.0, (1.0 - sq) / (sq * (1.0 + static_cast<double>(T_o))));
}

struct AlphaBound {
  double value = 0.0;
  std::array<double, 4> terms{};  // the four candidate bounds, in statement order
  int binding = 3;                // index of the term achieving the minimum
  const char* binding_name() const {
    switch (binding) {
      case 0: return "sqrt((1-l)(1-theta)/(16 L^2 l))";
      case 1: return "sqrt((lb-lb^2) l (1-theta)/(8 L^2 eta^2 To^2))";
      case 2: return "(l (1-lb)^2 (1-theta)/(32 L^4 eta^2 To^2))^(1/4)";
      default: return "1/(2L)";
    }
  }
};

inline AlphaBound alpha_max(double lambda, double eta, long T_o, double L) {
  check_lambda(lambda);
  if (!(L > 0.0)) throw ConfigError("alpha_max: L must be positive");
  const double th = theta(lambda, eta, T_o);
  if (!(th < 1.0))
    throw ConfigError("alpha_max: theta = " + std::to_string(th) +
                      " >= 1; eta violates the admissibility condition");
  constexpr double inf = std::numeric_limits<double>::infinity();
  AlphaBound b;
  const double lb = (1.0 + lambda) / 2.0;
  const double To = static_cast<double>(T_o);
  if (lambda < kLambdaZeroTol) {
    b.terms = {inf, inf, inf, 1.0 / (2.0 * L)};
  } else {
    b.terms[0] = std::sqrt((1.0 - lambda) * (1.0 - th) / (16.0 * L * L * lambda));
    b.terms[1] =
        std::sqrt((lb - lb * lb) * lambda * (1.0 - th) / (8.0 * L * L * eta * eta * To * To));
    b.terms[2] = std::pow(
        lambda * (1.0 - lb) * (1.0 - lb) * (1.0 - th) / (32.0 * L * L * L * L * eta * eta * To * To),
        0.25);
    b.terms[3] = 1.0 / (2.0 * L);
  }
  b.value = b.terms[0];
  b.binding = 0;
  for (int i = 1; i < 4; ++i)
    if (b.terms[i] < b.value) {
      b.value = b.terms[i];
      b.binding = i;
    }
  return b;
}

// Upper bound on (1/K) sum_k (||grad f(xbar^k)||^2 + ||mean grad f_i(x_i^k)||^2):
//   8 f~(xbar^0) / (eta alpha K)  +  4 alpha^2 L^2 T_o zeta_0 / (n K (1-lb)^2)
inline double rate_rhs(const TheoryParams& p) {
  check_lambda(p.lambda);
  if (p.K < 1) throw ConfigError("rate_rhs: horizon K must be at least 1");
  if (!(p.eta > 0.0) || !(p.alpha > 0.0)) throw ConfigError("rate_rhs: steps must be positive");
  const double K = static_cast<double>(p.K);
  const double lb = (1.0 + p.lambda) / 2.0;
  const double one_minus_lb = 1.0 - lb;
  const double first = 8.0 * p.f_tilde_0 / (p.eta * p.alpha * K);
  const double second = 4.0 * p.alpha * p.alpha * p.L * p.L * static_cast<double>(p.T_o) *
                        p.zeta_0 /
                        (static_cast<double>(p.n) * K * one_minus_lb * one_minus_lb);
  return first + second;
}

struct Lemma5Constants {
  double e1 = 0.0;
  double e2 = 0.0;
  double theta = 0.0;
  double lambda_bar = 0.5;
};

// e1 = 8 L^2 eta^2 alpha^2 T_o (1+eta T_o)^2 / (1-theta), e2 = n alpha^2 e1.
inline Lemma5Constants lemma5_constants(double lambda, double eta, double alpha, long T_o,
                                        double L, std::size_t n) {
  check_lambda(lambda);
  Lemma5Constants c;
  c.theta = theta(lambda, eta, T_o);
  c.lambda_bar = (1.0 + lambda) / 2.0;
  if (!(c.theta < 1.0))
    throw ConfigError("lemma5_constants: theta = " + std::to_string(c.theta) + " >= 1");
  const double To = static_cast<double>(T_o);
  const double s = 1.0 + eta * To;
  c.e1 = 8.0 * L * L * eta * eta * alpha * alpha * To * s * s / (1.0 - c.theta);
  c.e2 = 8.0 * static_cast<double>(n) * L * L * eta * eta * alpha * alpha * alpha * alpha * To *
         s * s / (1.0 - c.theta);
  return c;
}

// The consensus inequality carries its own, slightly different alpha
// conditions; both are surfaced for diagnostics.
inline std::array<double, 2> lemma5_alpha_terms(double lambda, double eta, long T_o, double L) {
  check_lambda(lambda);
  const double th = theta(lambda, eta, T_o);
  if (!(th < 1.0)) throw ConfigError("lemma5_alpha_terms: theta >= 1");
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (lambda < kLambdaZeroTol) return {inf, inf};
  const double lb = (1.0 + lambda) / 2.0;
  const double To = static_cast<double>(T_o);
  return {std::sqrt(lambda * (1.0 - lambda) * (1.0 - th) / (16.0 * L * L * To)),
          std::sqrt((lb - lb * lb) * lambda * (1.0 - th) / (8.0 * L * L * eta * eta * To * To))};
}

// Well-connected regime of the simplified rate: 1 >= lambda + sqrt(lambda).
inline bool remark2_regime(double lambda) {
  check_lambda(lambda);
  return lambda + std::sqrt(lambda) <= 1.0;
}

}  // namespace gtsim

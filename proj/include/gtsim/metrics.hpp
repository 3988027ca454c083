#pragma once

// Per-iteration diagnostics: stationarity norms, consensus errors, the
// augmented quantity ||Phi^k||^2, the heterogeneity measure zeta_0, and
// objective values. All norms are squared Euclidean/Frobenius.

#include <cstddef>
#include <span>
#include <vector>

#include "gtsim/errors.hpp"
#include "gtsim/matrix.hpp"
#include "gtsim/objective.hpp"
#include "gtsim/state.hpp"

namespace gtsim {

struct TraceRecord {
  long k = 0;
  long comm_rounds = 0;
  double grad_norm_avg_point = 0.0;  // ||grad f(xbar)||^2
  double avg_grad_norm = 0.0;        // ||mean_i grad f_i(x_i)||^2
  double consensus_x = 0.0;          // sum_i ||x_i - xbar||^2
  double consensus_y = 0.0;
  double phi_sq = 0.0;               // consensus_x + consensus_y
  double f_value = 0.0;              // f(xbar)
  double wallclock = 0.0;            // seconds since run start
};

namespace detail {
inline double consensus_error_sq(const Matrix& rows, std::span<const double> mean) {
  double s = 0.0;
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    const auto r = rows.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) {
      const double d = r[j] - mean[j];
      s += d * d;
    }
  }
  return s;
}
}  // namespace detail

template <ObjectiveFamily F>
TraceRecord measure(const NetworkState& state, const F& obj) {
  if (!all_finite(state.x) || !all_finite(state.y))
    throw DivergenceError("measure: non-finite state", state.k);
  const std::size_t n = obj.num_agents();
  const std::size_t m = obj.dim();

  TraceRecord rec;
  rec.k = state.k;
  rec.comm_rounds = state.comm_rounds;

  const std::vector<double> xbar = row_mean(state.x);
  const std::vector<double> ybar = row_mean(state.y);

  // grad f(xbar): every agent's gradient evaluated at the common average
  std::vector<double> g(m), grad_at_avg(m, 0.0), avg_grad(m, 0.0);
  double f_at_avg = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    obj.gradient(i, xbar, g);
    for (std::size_t j = 0; j < m; ++j) grad_at_avg[j] += g[j];
    obj.gradient(i, state.x.row(i), g);
    for (std::size_t j = 0; j < m; ++j) avg_grad[j] += g[j];
    f_at_avg += obj.value(i, xbar);
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < m; ++j) {
    grad_at_avg[j] *= inv_n;
    avg_grad[j] *= inv_n;
  }

  rec.grad_norm_avg_point = norm_sq(grad_at_avg);
  rec.avg_grad_norm = norm_sq(avg_grad);
  rec.consensus_x = detail::consensus_error_sq(state.x, xbar);
  rec.consensus_y = detail::consensus_error_sq(state.y, ybar);
  rec.phi_sq = rec.consensus_x + rec.consensus_y;
  rec.f_value = f_at_avg * inv_n;
  return rec;
}

// zeta_0 = sum_i ||grad f_i(x0) - mean_j grad f_j(x0)||^2
template <ObjectiveFamily F>
double zeta0(const F& obj, std::span<const double> x0) {
  const std::size_t n = obj.num_agents();
  const std::size_t m = obj.dim();
  Matrix grads(n, m);
  for (std::size_t i = 0; i < n; ++i) obj.gradient(i, x0, grads.row(i));
  const std::vector<double> mean = row_mean(grads);
  return detail::consensus_error_sq(grads, mean);
}

// Prefix averages of the per-iteration stationarity measure. Matches the
// theorem's left-hand side only when the trace was recorded every iteration.
inline std::vector<double> running_average_stationarity(const std::vector<TraceRecord>& trace) {
  std::vector<double> out;
  out.reserve(trace.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    sum += trace[i].grad_norm_avg_point + trace[i].avg_grad_norm;
    out.push_back(sum / static_cast<double>(i + 1));
  }
  return out;
}

}  // namespace gtsim

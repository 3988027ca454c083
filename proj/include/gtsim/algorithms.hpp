#pragma once

// The locally-updated gradient-tracking recursion, the vanilla ATC
// gradient-tracking reference, and a locally-updated DGD baseline.
// One run is serial in k; everything is deterministic given the inputs.

#include <chrono>
#include <cstddef>
#include <span>
#include <vector>

#include "gtsim/errors.hpp"
#include "gtsim/matrix.hpp"
#include "gtsim/metrics.hpp"
#include "gtsim/mixing.hpp"
#include "gtsim/objective.hpp"
#include "gtsim/state.hpp"

namespace gtsim {

namespace detail {

template <ObjectiveFamily F>
Matrix eval_gradients(const F& obj, const Matrix& x) {
  Matrix g(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) obj.gradient(i, x.row(i), g.row(i));
  return g;
}

// x - step*d, mixed through W on communication iterations
inline Matrix descend_and_mix(const Matrix& x, const Matrix& d, double step, const Matrix& w,
                              bool communicate) {
  Matrix t(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) t(i, j) = x(i, j) - step * d(i, j);
  return communicate ? matmul(w, t) : t;
}

// y + alpha*(g_new) - alpha*(g_old), mixed on communication iterations
inline Matrix track_update(const Matrix& y, const Matrix& g_new, const Matrix& g_old,
                           double alpha, const Matrix& w, bool communicate) {
  Matrix t(y.rows(), y.cols());
  for (std::size_t i = 0; i < y.rows(); ++i)
    for (std::size_t j = 0; j < y.cols(); ++j)
      t(i, j) = y(i, j) + alpha * g_new(i, j) - alpha * g_old(i, j);
  return communicate ? matmul(w, t) : t;
}

inline void require_finite(const NetworkState& state) {
  if (!all_finite(state.x) || !all_finite(state.y))
    throw DivergenceError("non-finite algorithm state", state.k);
}

}  // namespace detail

// One locally-updated gradient-tracking iteration:
//   communicate:  x+ = W(x - eta y),  y+ = W(y + a grad f(x+) - a grad f(x))
//   local:        x+ = x - eta y,     y+ = y + a grad f(x+) - a grad f(x)
template <ObjectiveFamily F>
NetworkState lu_gt_step(const NetworkState& state, const MixingMatrix& w, const F& obj,
                        double eta, double alpha, bool communicate) {
  detail::require_finite(state);
  NetworkState next;
  next.x = detail::descend_and_mix(state.x, state.y, eta, w.w(), communicate);
  const Matrix g_old = detail::eval_gradients(obj, state.x);
  const Matrix g_new = detail::eval_gradients(obj, next.x);
  next.y = detail::track_update(state.y, g_new, g_old, alpha, w.w(), communicate);
  next.k = state.k + 1;
  next.comm_rounds = state.comm_rounds + (communicate ? 1 : 0);
  return next;
}

// Vanilla adapt-then-combine gradient tracking with stepsize eta_bar;
// communicates every iteration. y carries the raw-gradient tracker.
template <ObjectiveFamily F>
NetworkState atc_gt_step(const NetworkState& state, const MixingMatrix& w, const F& obj,
                         double eta_bar) {
  detail::require_finite(state);
  NetworkState next;
  next.x = detail::descend_and_mix(state.x, state.y, eta_bar, w.w(), true);
  const Matrix g_old = detail::eval_gradients(obj, state.x);
  const Matrix g_new = detail::eval_gradients(obj, next.x);
  next.y = detail::track_update(state.y, g_new, g_old, 1.0, w.w(), true);
  next.k = state.k + 1;
  next.comm_rounds = state.comm_rounds + 1;
  return next;
}

// Locally-updated DGD baseline: x+ = [W](x - stepsize grad f(x)); y unused.
template <ObjectiveFamily F>
NetworkState dgd_local_step(const NetworkState& state, const MixingMatrix& w, const F& obj,
                            double stepsize, bool communicate) {
  detail::require_finite(state);
  NetworkState next;
  const Matrix g = detail::eval_gradients(obj, state.x);
  next.x = detail::descend_and_mix(state.x, g, stepsize, w.w(), communicate);
  next.y = state.y;
  next.k = state.k + 1;
  next.comm_rounds = state.comm_rounds + (communicate ? 1 : 0);
  return next;
}

// Per-iteration view handed to an observer; vectors are network averages.
// eta and alpha are the effective values of the executed recursion (for
// atc_gt the tracker holds raw gradients, so alpha = 1 and eta = eta*alpha).
struct StepInfo {
  AlgorithmKind algorithm = AlgorithmKind::lu_gt;
  long k = 0;  // iteration being applied (state k -> k+1)
  bool communicate = false;
  double eta = 0.0;
  double alpha = 0.0;
  std::span<const double> xbar_prev;
  std::span<const double> ybar_prev;
  std::span<const double> mean_grad_prev;  // mean_i grad f_i(x_i^k)
  std::span<const double> xbar_next;
  std::span<const double> ybar_next;
  std::span<const double> mean_grad_next;
};

struct StepObserver {
  virtual ~StepObserver() = default;
  virtual void on_step(const StepInfo& info) = 0;
};

struct RunResult {
  std::vector<TraceRecord> trace;
  bool diverged = false;
  long divergence_iteration = -1;
  NetworkState final_state;
};

// Executes the configured algorithm for K iterations from identical agent
// starts. Records every record_every iterations plus the final state; a
// non-finite or runaway state truncates the trajectory and sets the flag.
template <ObjectiveFamily F>
RunResult run(const RunConfig& config, const MixingMatrix& w, const F& obj,
              std::span<const double> init, StepObserver* observer = nullptr) {
  const std::size_t n = obj.num_agents();
  const std::size_t m = obj.dim();
  if (config.schedule.K < 1) throw ConfigError("run: K must be at least 1");
  if (config.schedule.T_o < 1) throw ConfigError("run: T_o must be at least 1");
  if (config.record_every < 1) throw ConfigError("run: record_every must be at least 1");
  if (!(config.eta > 0.0) || !(config.alpha > 0.0))
    throw ConfigError("run: eta and alpha must be positive");
  if (config.algorithm == AlgorithmKind::atc_gt && config.schedule.T_o != 1)
    throw ConfigError("run: atc_gt communicates every iteration; set T_o = 1");
  if (w.size() != n) throw ConfigError("run: mixing matrix size does not match agent count");
  if (init.size() != m) throw ConfigError("run: init dimension does not match objective");
  for (double v : init)
    if (!std::isfinite(v)) throw ConfigError("run: init must be finite");

  const auto t_start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  };

  NetworkState state;
  state.x = Matrix(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) state.x(i, j) = init[j];
  Matrix grads = detail::eval_gradients(obj, state.x);

  const double step_product = config.eta * config.alpha;
  switch (config.algorithm) {
    case AlgorithmKind::lu_gt: {
      state.y = Matrix(n, m);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) state.y(i, j) = config.alpha * grads(i, j);
      break;
    }
    case AlgorithmKind::atc_gt:
      state.y = grads;
      break;
    case AlgorithmKind::dgd_local:
      state.y = Matrix(n, m);
      break;
  }

  RunResult result;
  std::vector<double> xbar_prev, ybar_prev, gbar_prev, xbar_next, ybar_next, gbar_next;

  for (long k = 0; k < config.schedule.K; ++k) {
    if (k % config.record_every == 0) {
      TraceRecord rec = measure(state, obj);
      rec.wallclock = elapsed();
      result.trace.push_back(rec);
    }
    const bool communicate =
        config.algorithm == AlgorithmKind::atc_gt || config.schedule.is_comm(k);

    if (observer) {
      xbar_prev = row_mean(state.x);
      ybar_prev = row_mean(state.y);
      gbar_prev = row_mean(grads);
    }

    Matrix x_next;
    switch (config.algorithm) {
      case AlgorithmKind::lu_gt: {
        x_next = detail::descend_and_mix(state.x, state.y, config.eta, w.w(), communicate);
        Matrix g_next = detail::eval_gradients(obj, x_next);
        state.y = detail::track_update(state.y, g_next, grads, config.alpha, w.w(), communicate);
        grads = std::move(g_next);
        break;
      }
      case AlgorithmKind::atc_gt: {
        x_next = detail::descend_and_mix(state.x, state.y, step_product, w.w(), true);
        Matrix g_next = detail::eval_gradients(obj, x_next);
        state.y = detail::track_update(state.y, g_next, grads, 1.0, w.w(), true);
        grads = std::move(g_next);
        break;
      }
      case AlgorithmKind::dgd_local: {
        x_next = detail::descend_and_mix(state.x, grads, step_product, w.w(), communicate);
        grads = detail::eval_gradients(obj, x_next);
        break;
      }
    }
    state.x = std::move(x_next);
    state.k = k + 1;
    if (communicate) ++state.comm_rounds;

    if (observer) {
      xbar_next = row_mean(state.x);
      ybar_next = row_mean(state.y);
      gbar_next = row_mean(grads);
      StepInfo info;
      info.algorithm = config.algorithm;
      info.k = k;
      info.communicate = communicate;
      if (config.algorithm == AlgorithmKind::lu_gt) {
        info.eta = config.eta;
        info.alpha = config.alpha;
      } else {
        info.eta = step_product;
        info.alpha = 1.0;
      }
      info.xbar_prev = xbar_prev;
      info.ybar_prev = ybar_prev;
      info.mean_grad_prev = gbar_prev;
      info.xbar_next = xbar_next;
      info.ybar_next = ybar_next;
      info.mean_grad_next = gbar_next;
      observer->on_step(info);
    }

    if (!all_finite(state.x) || !all_finite(state.y) || max_abs(state.x) > 1e12) {
      result.diverged = true;
      result.divergence_iteration = state.k;
      result.final_state = std::move(state);
      return result;
    }
  }

  TraceRecord rec = measure(state, obj);
  rec.wallclock = elapsed();
  result.trace.push_back(rec);
  result.final_state = std::move(state);
  return result;
}

}  // namespace gtsim

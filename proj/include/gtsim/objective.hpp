#pragma once

// Per-agent smooth cost families, the nonconvex regularized least-squares
// instance, synthetic data generation, and a finite-difference gradient
// oracle.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "gtsim/errors.hpp"
#include "gtsim/matrix.hpp"
#include "gtsim/rng.hpp"

namespace gtsim {

// A family of n smooth costs f_i : R^m -> R with analytic gradients and a
// global smoothness estimate. Evaluators must be pure.
template <class F>
concept ObjectiveFamily = requires(const F& f, std::size_t i, std::span<const double> x,
                                   std::span<double> g) {
  { f.num_agents() } -> std::convertible_to<std::size_t>;
  { f.dim() } -> std::convertible_to<std::size_t>;
  { f.value(i, x) } -> std::convertible_to<double>;
  { f.gradient(i, x, g) };
  { f.smoothness() } -> std::convertible_to<double>;
};

struct RegLSData {
  std::size_t n = 0;  // agents
  std::size_t p = 0;  // rows per agent
  std::size_t m = 0;  // parameter dimension
  double rho = 0.0;   // regularization weight
  std::uint64_t seed = 0;
  std::vector<Matrix> a;               // n matrices, each p x m
  std::vector<std::vector<double>> b;  // n vectors, each length p

  bool operator==(const RegLSData&) const = default;
};

// The regularizer r applied coordinate-wise. `smooth` is t^2/(1+t^2)
// (globally L-smooth, |r''| <= 2); `printed` is t/(1+t), which has a pole
// at t = -1 and is only usable on a restricted domain.
enum class Regularizer { smooth, printed };

inline const char* to_string(Regularizer r) {
  return r == Regularizer::smooth ? "smooth" : "printed";
}

namespace detail {

inline double regularizer_value(Regularizer kind, double t) {
  if (kind == Regularizer::smooth) return t * t / (1.0 + t * t);
  return t / (1.0 + t);
}

inline double regularizer_slope(Regularizer kind, double t) {
  if (kind == Regularizer::smooth) {
    const double d = 1.0 + t * t;
    return 2.0 * t / (d * d);
  }
  const double d = 1.0 + t;
  return 1.0 / (d * d);
}

inline void check_agent_and_dim(const RegLSData& data, std::size_t agent,
                                std::span<const double> x) {
  if (agent >= data.n)
    throw ShapeError("agent index " + std::to_string(agent) + " out of range (n = " +
                     std::to_string(data.n) + ")");
  if (x.size() != data.m)
    throw ShapeError("parameter dimension " + std::to_string(x.size()) + " != m = " +
                     std::to_string(data.m));
}

inline double regls_value_impl(const RegLSData& data, std::size_t agent,
                               std::span<const double> x, double ls_scale, Regularizer reg) {
  check_agent_and_dim(data, agent, x);
  const Matrix& a = data.a[agent];
  const std::vector<double>& b = data.b[agent];
  double lsq = 0.0;
  for (std::size_t r = 0; r < data.p; ++r) {
    const double res = dot(a.row(r), x) - b[r];
    lsq += res * res;
  }
  double reg_sum = 0.0;
  for (double t : x) reg_sum += regularizer_value(reg, t);
  return ls_scale * lsq + data.rho * reg_sum;
}

inline void regls_grad_impl(const RegLSData& data, std::size_t agent, std::span<const double> x,
                            std::span<double> out, double ls_scale, Regularizer reg) {
  check_agent_and_dim(data, agent, x);
  if (out.size() != data.m) throw ShapeError("gradient buffer has wrong dimension");
  const Matrix& a = data.a[agent];
  const std::vector<double>& b = data.b[agent];
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t r = 0; r < data.p; ++r) {
    const double res = dot(a.row(r), x) - b[r];
    const double coef = ls_scale * 2.0 * res;
    const auto row = a.row(r);
    for (std::size_t j = 0; j < data.m; ++j) out[j] += coef * row[j];
  }
  for (std::size_t j = 0; j < data.m; ++j) out[j] += data.rho * regularizer_slope(reg, x[j]);
}

// Largest eigenvalue of a^T a by power iteration, 1e-8 relative tolerance.
inline double gram_spectral_norm(const Matrix& a) {
  const std::size_t m = a.cols();
  Matrix gram(m, m);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const auto row = a.row(r);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) gram(i, j) += row[i] * row[j];
  }
  std::vector<double> v(m, 1.0);
  for (std::size_t j = 0; j < m; ++j) v[j] += 1e-3 * static_cast<double>(j);  // break symmetry
  double rayleigh = 0.0;
  for (int it = 0; it < 100000; ++it) {
    std::vector<double> w(m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) w[i] += gram(i, j) * v[j];
    const double nw = norm(w);
    if (nw == 0.0) return 0.0;
    for (double& e : w) e /= nw;
    double r = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double gi = 0.0;
      for (std::size_t j = 0; j < m; ++j) gi += gram(i, j) * w[j];
      r += w[i] * gi;
    }
    v = std::move(w);
    if (std::abs(r - rayleigh) <= 1e-8 * std::max(std::abs(r), 1e-300)) return r;
    rayleigh = r;
  }
  return rayleigh;
}

}  // namespace detail

// f_i(x) = ||A_i x - b_i||^2 + rho * sum_j r(x_j) with the smooth regularizer.
inline double regls_value(const RegLSData& data, std::size_t agent, std::span<const double> x) {
  return detail::regls_value_impl(data, agent, x, 1.0, Regularizer::smooth);
}

// grad f_i(x) = 2 A_i^T (A_i x - b_i) + rho * g(x), g(x)_j = 2 x_j/(1+x_j^2)^2.
inline std::vector<double> regls_grad(const RegLSData& data, std::size_t agent,
                                      std::span<const double> x) {
  std::vector<double> g(data.m, 0.0);
  detail::regls_grad_impl(data, agent, x, g, 1.0, Regularizer::smooth);
  return g;
}

// Heterogeneous synthetic instance: A_i entries are standard normal, a
// shared base vector x* ~ N(0, I_m) is perturbed per agent by
// v_i ~ N(0, (hetero_scale*i)^2 I_m) (i counted from 1), and
// b_i = A_i (x* + v_i) + noise_scale * z_i with z_i ~ N(0, (0.1)^2 I_p).
// Fully determined by the seed.
inline RegLSData generate_synthetic(std::uint64_t seed, std::size_t n, std::size_t p,
                                    std::size_t m, double noise_scale = 0.1,
                                    double hetero_scale = 0.1, double rho = 0.0) {
  if (n == 0 || p == 0 || m == 0)
    throw ConfigError("generate_synthetic: n, p, m must all be positive");
  if (rho < 0.0) throw ConfigError("generate_synthetic: rho must be nonnegative");
  RegLSData data;
  data.n = n;
  data.p = p;
  data.m = m;
  data.rho = rho;
  data.seed = seed;
  NormalSampler rng(seed);
  std::vector<double> base(m);
  for (double& e : base) e = rng.normal();
  data.a.reserve(n);
  data.b.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Matrix a(p, m);
    for (std::size_t r = 0; r < p; ++r)
      for (std::size_t c = 0; c < m; ++c) a(r, c) = rng.normal();
    std::vector<double> target = base;
    const double vstd = hetero_scale * static_cast<double>(i + 1);
    for (double& e : target) e += vstd * rng.normal();
    std::vector<double> b(p);
    for (std::size_t r = 0; r < p; ++r) {
      const double z = 0.1 * rng.normal();
      b[r] = dot(a.row(r), target) + noise_scale * z;
    }
    data.a.push_back(std::move(a));
    data.b.push_back(std::move(b));
  }
  return data;
}

// Direct solve of the rho = 0 normal equations sum_i A_i^T A_i x = sum_i A_i^T b_i.
inline std::vector<double> global_minimizer_quadratic(const RegLSData& data) {
  if (data.rho != 0.0)
    throw ConfigError("global_minimizer_quadratic requires rho = 0");
  const std::size_t m = data.m;
  Matrix normal(m, m);
  std::vector<double> rhs(m, 0.0);
  for (std::size_t i = 0; i < data.n; ++i) {
    const Matrix& a = data.a[i];
    for (std::size_t r = 0; r < data.p; ++r) {
      const auto row = a.row(r);
      for (std::size_t c = 0; c < m; ++c) {
        for (std::size_t d = 0; d < m; ++d) normal(c, d) += row[c] * row[d];
        rhs[c] += row[c] * data.b[i][r];
      }
    }
  }
  std::vector<double> x = solve_spd(normal, rhs);
  // residual guard on the normal equations
  double res_sq = 0.0;
  for (std::size_t c = 0; c < m; ++c) {
    double v = -rhs[c];
    for (std::size_t d = 0; d < m; ++d) v += normal(c, d) * x[d];
    res_sq += v * v;
  }
  if (std::sqrt(res_sq) > 1e-8 * std::max(norm(rhs), 1e-300))
    throw RankDeficientError("global_minimizer_quadratic: normal equations poorly conditioned");
  return x;
}

// Evaluation family over a RegLSData instance. ls_scale multiplies the
// least-squares term (1.0 reproduces regls_value / regls_grad exactly).
class RegLSObjective {
 public:
  explicit RegLSObjective(RegLSData data, double ls_scale = 1.0,
                          Regularizer reg = Regularizer::smooth)
      : data_(std::move(data)), ls_scale_(ls_scale), reg_(reg) {
    if (ls_scale_ <= 0.0) throw ConfigError("ls_scale must be positive");
    double max_gram = 0.0;
    for (const Matrix& a : data_.a)
      max_gram = std::max(max_gram, detail::gram_spectral_norm(a));
    // |r''| <= 2 for the smooth regularizer
    smoothness_ = 2.0 * ls_scale_ * max_gram + 2.0 * data_.rho;
  }

  std::size_t num_agents() const { return data_.n; }
  std::size_t dim() const { return data_.m; }
  double ls_scale() const { return ls_scale_; }
  Regularizer regularizer() const { return reg_; }
  const RegLSData& data() const { return data_; }

  double value(std::size_t agent, std::span<const double> x) const {
    return detail::regls_value_impl(data_, agent, x, ls_scale_, reg_);
  }
  void gradient(std::size_t agent, std::span<const double> x, std::span<double> out) const {
    detail::regls_grad_impl(data_, agent, x, out, ls_scale_, reg_);
  }
  double smoothness() const { return smoothness_; }

 private:
  RegLSData data_;
  double ls_scale_;
  Regularizer reg_;
  double smoothness_;
};

// Worst relative error between analytic gradients and central differences,
// over all agents and coordinates.
template <ObjectiveFamily F>
double fd_gradient_check(const F& obj, std::span<const double> x, double h) {
  if (!(h > 0.0)) throw ConfigError("fd_gradient_check: h must be positive");
  const std::size_t m = obj.dim();
  std::vector<double> xp(x.begin(), x.end());
  std::vector<double> g(m);
  double worst = 0.0;
  for (std::size_t i = 0; i < obj.num_agents(); ++i) {
    obj.gradient(i, x, g);
    for (std::size_t j = 0; j < m; ++j) {
      const double orig = xp[j];
      xp[j] = orig + h;
      const double fp = obj.value(i, xp);
      xp[j] = orig - h;
      const double fm = obj.value(i, xp);
      xp[j] = orig;
      const double fd = (fp - fm) / (2.0 * h);
      worst = std::max(worst, std::abs(fd - g[j]) / std::max(1.0, std::abs(g[j])));
    }
  }
  return worst;
}

// --- dataset container ------------------------------------------------
// Flat binary layout: magic, version, n, p, m (u64 each), rho (f64),
// seed (u64), then per agent the row-major A_i block and b_i. Exact
// round-trip of every double.

namespace detail {
constexpr std::uint64_t kDatasetMagic = 0x475453494d445331ull;  // "GTSIMDS1"

inline void put_u64(std::ostream& out, std::uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(buf, 8);
}

inline std::uint64_t get_u64(std::istream& in) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

inline void put_f64(std::ostream& out, double d) {
  std::uint64_t v;
  static_assert(sizeof(v) == sizeof(d));
  std::memcpy(&v, &d, 8);
  put_u64(out, v);
}

inline double get_f64(std::istream& in) {
  const std::uint64_t v = get_u64(in);
  double d;
  std::memcpy(&d, &v, 8);
  return d;
}
}  // namespace detail

inline void save_dataset(const RegLSData& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  detail::put_u64(out, detail::kDatasetMagic);
  detail::put_u64(out, data.n);
  detail::put_u64(out, data.p);
  detail::put_u64(out, data.m);
  detail::put_f64(out, data.rho);
  detail::put_u64(out, data.seed);
  for (std::size_t i = 0; i < data.n; ++i) {
    for (std::size_t r = 0; r < data.p; ++r)
      for (std::size_t c = 0; c < data.m; ++c) detail::put_f64(out, data.a[i](r, c));
    for (std::size_t r = 0; r < data.p; ++r) detail::put_f64(out, data.b[i][r]);
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline RegLSData load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset '" + path.string() + "'");
  if (detail::get_u64(in) != detail::kDatasetMagic)
    throw IoError("'" + path.string() + "' is not a dataset file");
  RegLSData data;
  data.n = detail::get_u64(in);
  data.p = detail::get_u64(in);
  data.m = detail::get_u64(in);
  data.rho = detail::get_f64(in);
  data.seed = detail::get_u64(in);
  if (!in || data.n == 0 || data.p == 0 || data.m == 0)
    throw IoError("dataset header of '" + path.string() + "' is invalid");
  data.a.reserve(data.n);
  data.b.reserve(data.n);
  for (std::size_t i = 0; i < data.n; ++i) {
    Matrix a(data.p, data.m);
    for (std::size_t r = 0; r < data.p; ++r)
      for (std::size_t c = 0; c < data.m; ++c) a(r, c) = detail::get_f64(in);
    std::vector<double> b(data.p);
    for (std::size_t r = 0; r < data.p; ++r) b[r] = detail::get_f64(in);
    data.a.push_back(std::move(a));
    data.b.push_back(std::move(b));
  }
  if (!in) throw IoError("dataset '" + path.string() + "' is truncated");
  return data;
}

}  // namespace gtsim

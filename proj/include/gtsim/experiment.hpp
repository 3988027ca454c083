#pragma once

// Configuration-driven experiment runner: builds topology and objective,
// executes a sweep of runs, and writes trace CSVs, a summary.json with
// spectral/theory reports, and an SVG convergence plot.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gtsim/algorithms.hpp"
#include "gtsim/graph.hpp"
#include "gtsim/metrics.hpp"
#include "gtsim/mixing.hpp"
#include "gtsim/objective.hpp"
#include "gtsim/theory.hpp"

namespace gtsim {

struct TopologySpec {
  GraphKind kind = GraphKind::ring;
  std::size_t n = 0;
  std::string edge_list;  // path; when set the kind is custom
};

struct ObjectiveSpec {
  std::string dataset;  // path to a saved dataset; when set the synthetic params are ignored
  std::uint64_t seed = 0;
  std::size_t n = 25;
  std::size_t p = 500;
  std::size_t m = 20;
  double rho = 0.0;
  double noise_scale = 0.1;
  double hetero_scale = 0.1;
  double ls_scale = 1.0;
  double f_star_lower = 0.0;  // lower bound on f*, used by the rate bound
  Regularizer regularizer = Regularizer::smooth;
};

struct RunSpec {
  AlgorithmKind algorithm = AlgorithmKind::lu_gt;
  long T_o = 1;
  std::optional<double> eta;
  std::optional<double> alpha;
  std::optional<double> eta_alpha;  // product; split by the default rule when eta/alpha absent
  long K = 1;
  long record_every = 1;
  bool override_admissibility = false;
};

enum class XAxis { iterations, comm_rounds };

struct ExperimentConfig {
  TopologySpec topology;
  ObjectiveSpec objective;
  std::vector<RunSpec> runs;
  std::string output_dir = "out";
  bool plot = true;
  XAxis x_axis = XAxis::comm_rounds;
};

// Default split of a target product eta*alpha: eta = 0.9 min(1, (1-sqrt(l))/(2 sqrt(l)))/T_o,
// which is proportional to 1/T_o and stays strictly below eta_max(l, T_o)
// for every T_o >= 1; alpha takes the rest.
inline std::pair<double, double> split_eta_alpha(double eta_alpha, double lambda, long T_o,
                                                 [[maybe_unused]] double L) {
  if (!(eta_alpha > 0.0)) throw ConfigError("split_eta_alpha: eta_alpha must be positive");
  check_lambda(lambda);
  if (T_o < 1) throw ConfigError("split_eta_alpha: T_o must be at least 1");
  const double sq = std::sqrt(lambda);
  const double c = 0.9 * std::min(1.0, (1.0 - sq) / (2.0 * sq));  // +inf at lambda = 0
  const double eta = c / static_cast<double>(T_o);
  const double alpha = eta_alpha / eta;
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw ConfigError("split_eta_alpha: resulting alpha is not positive and finite");
  return {eta, alpha};
}

// ----- config parsing ---------------------------------------------------

namespace detail {

template <class T>
T get_field(const nlohmann::json& j, const std::string& context, const std::string& key) {
  if (!j.contains(key)) throw ConfigError(context + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(context + ": field '" + key + "' has the wrong type (" + e.what() + ")");
  }
}

template <class T>
T get_field_or(const nlohmann::json& j, const std::string& context, const std::string& key,
               T fallback) {
  if (!j.contains(key)) return fallback;
  return get_field<T>(j, context, key);
}

}  // namespace detail

inline ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
  using detail::get_field;
  using detail::get_field_or;
  ExperimentConfig cfg;

  if (!j.contains("topology")) throw ConfigError("config: missing field 'topology'");
  const auto& jt = j.at("topology");
  if (jt.contains("edge_list")) {
    cfg.topology.edge_list = get_field<std::string>(jt, "topology", "edge_list");
    cfg.topology.kind = GraphKind::custom;
  } else {
    cfg.topology.kind = graph_kind_from_string(get_field<std::string>(jt, "topology", "kind"));
    cfg.topology.n = get_field<std::size_t>(jt, "topology", "n");
  }

  if (!j.contains("objective")) throw ConfigError("config: missing field 'objective'");
  const auto& jo = j.at("objective");
  ObjectiveSpec& obj = cfg.objective;
  if (jo.contains("dataset")) {
    obj.dataset = get_field<std::string>(jo, "objective", "dataset");
  } else {
    obj.seed = get_field<std::uint64_t>(jo, "objective", "seed");
    obj.n = get_field<std::size_t>(jo, "objective", "n");
    obj.p = get_field_or<std::size_t>(jo, "objective", "p", obj.p);
    obj.m = get_field_or<std::size_t>(jo, "objective", "m", obj.m);
    obj.noise_scale = get_field_or<double>(jo, "objective", "noise_scale", obj.noise_scale);
    obj.hetero_scale = get_field_or<double>(jo, "objective", "hetero_scale", obj.hetero_scale);
  }
  obj.rho = get_field_or<double>(jo, "objective", "rho", obj.rho);
  obj.ls_scale = get_field_or<double>(jo, "objective", "ls_scale", obj.ls_scale);
  obj.f_star_lower = get_field_or<double>(jo, "objective", "f_star_lower", obj.f_star_lower);
  const std::string reg = get_field_or<std::string>(jo, "objective", "regularizer", "smooth");
  if (reg == "smooth") {
    obj.regularizer = Regularizer::smooth;
  } else if (reg == "printed") {
    obj.regularizer = Regularizer::printed;
  } else {
    throw ConfigError("objective: regularizer must be 'smooth' or 'printed', got '" + reg + "'");
  }

  if (!j.contains("runs")) throw ConfigError("config: missing field 'runs'");
  std::size_t idx = 0;
  for (const auto& jr : j.at("runs")) {
    const std::string ctx = "runs[" + std::to_string(idx++) + "]";
    RunSpec r;
    r.algorithm = algorithm_from_string(get_field<std::string>(jr, ctx, "algorithm"));
    r.T_o = get_field_or<long>(jr, ctx, "T_o", 1);
    r.K = get_field<long>(jr, ctx, "K");
    r.record_every = get_field_or<long>(jr, ctx, "record_every", 1);
    r.override_admissibility = get_field_or<bool>(jr, ctx, "override", false);
    if (jr.contains("eta")) r.eta = get_field<double>(jr, ctx, "eta");
    if (jr.contains("alpha")) r.alpha = get_field<double>(jr, ctx, "alpha");
    if (jr.contains("eta_alpha")) r.eta_alpha = get_field<double>(jr, ctx, "eta_alpha");
    if (r.eta.has_value() != r.alpha.has_value())
      throw ConfigError(ctx + ": eta and alpha must be given together");
    if (!r.eta && !r.eta_alpha)
      throw ConfigError(ctx + ": give either eta_alpha or an explicit eta/alpha pair");
    if (r.K < 1) throw ConfigError(ctx + ": K must be at least 1");
    if (r.T_o < 1) throw ConfigError(ctx + ": T_o must be at least 1");
    if (r.record_every < 1) throw ConfigError(ctx + ": record_every must be at least 1");
    cfg.runs.push_back(r);
  }

  cfg.output_dir = get_field_or<std::string>(j, "config", "output_dir", cfg.output_dir);
  cfg.plot = get_field_or<bool>(j, "config", "plot", cfg.plot);
  const std::string xa = get_field_or<std::string>(j, "config", "x_axis", "comm_rounds");
  if (xa == "iterations") {
    cfg.x_axis = XAxis::iterations;
  } else if (xa == "comm_rounds") {
    cfg.x_axis = XAxis::comm_rounds;
  } else {
    throw ConfigError("config: x_axis must be 'iterations' or 'comm_rounds', got '" + xa + "'");
  }
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "': " + e.what());
  }
  return parse_experiment_config(j);
}

// ----- artifacts ----------------------------------------------------------

namespace detail {

inline void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out << contents;
    if (!out) throw IoError("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string trace_to_csv(const std::vector<TraceRecord>& trace) {
  std::string out = "k,comm_rounds,grad_norm_avg_point,avg_grad_norm,consensus_x,consensus_y,"
                    "phi_sq,f_value\n";
  for (const TraceRecord& r : trace) {
    out += std::to_string(r.k);
    out += ',';
    out += std::to_string(r.comm_rounds);
    for (double v : {r.grad_norm_avg_point, r.avg_grad_norm, r.consensus_x, r.consensus_y,
                     r.phi_sq, r.f_value}) {
      out += ',';
      out += format_g17(v);
    }
    out += '\n';
  }
  return out;
}

}  // namespace detail

struct RunReport {
  RunSpec spec;
  double eta = 0.0;
  double alpha = 0.0;
  bool admissible = false;
  std::string violated;  // empty when admissible
  double eta_bound = 0.0;
  AlphaBound alpha_bound;
  double theta_value = 0.0;
  double rate_bound_at_K = 0.0;
  bool diverged = false;
  long divergence_iteration = -1;
  long comm_rounds = 0;
  TraceRecord final_record;
  double wallclock = 0.0;
  std::string csv_file;
  std::vector<TraceRecord> trace;
};

struct ExperimentOutcome {
  bool any_divergence = false;
  std::string warning;
  double lambda = 0.0;
  double lambda_bar = 0.5;
  double smoothness = 0.0;
  double zeta_0 = 0.0;
  double f_0 = 0.0;
  std::vector<RunReport> runs;
  std::filesystem::path summary_path;
  std::filesystem::path plot_path;
};

namespace detail {

inline std::string svg_plot(const std::vector<RunReport>& runs, XAxis x_axis,
                            const std::string& title) {
  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  const double width = 720, height = 480;
  const double ml = 70, mr = 160, mt = 40, mb = 50;

  double xmax = 1.0, ymin = 1e300, ymax = -1e300;
  for (const RunReport& r : runs)
    for (const TraceRecord& t : r.trace) {
      const double x = x_axis == XAxis::comm_rounds ? static_cast<double>(t.comm_rounds)
                                                    : static_cast<double>(t.k);
      xmax = std::max(xmax, x);
      const double y = std::log10(std::max(t.grad_norm_avg_point + t.avg_grad_norm, 1e-300));
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  if (ymin > ymax) {
    ymin = -1;
    ymax = 1;
  }
  if (ymax - ymin < 1e-9) ymax = ymin + 1;

  auto px = [&](double x) { return ml + (width - ml - mr) * (x / xmax); };
  auto py = [&](double ylog) { return mt + (height - mt - mb) * (ymax - ylog) / (ymax - ymin); };

  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
      << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
  svg << "<text x='" << (ml + (width - ml - mr) / 2) << "' y='24' text-anchor='middle' "
      << "font-family='sans-serif' font-size='15'>" << title << "</text>\n";
  svg << "<rect x='" << ml << "' y='" << mt << "' width='" << (width - ml - mr) << "' height='"
      << (height - mt - mb) << "' fill='none' stroke='black'/>\n";
  // y ticks at integer decades
  for (int d = static_cast<int>(std::ceil(ymin)); d <= static_cast<int>(std::floor(ymax)); ++d) {
    if (ymax - ymin > 12 && d % 4 != 0) continue;
    const double y = py(d);
    svg << "<line x1='" << (ml - 4) << "' y1='" << y << "' x2='" << ml << "' y2='" << y
        << "' stroke='black'/>\n";
    svg << "<text x='" << (ml - 8) << "' y='" << (y + 4)
        << "' text-anchor='end' font-family='sans-serif' font-size='11'>1e" << d << "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    const double x = xmax * i / 4.0;
    svg << "<line x1='" << px(x) << "' y1='" << (height - mb) << "' x2='" << px(x) << "' y2='"
        << (height - mb + 4) << "' stroke='black'/>\n";
    svg << "<text x='" << px(x) << "' y='" << (height - mb + 18)
        << "' text-anchor='middle' font-family='sans-serif' font-size='11'>"
        << static_cast<long>(x) << "</text>\n";
  }
  svg << "<text x='" << (ml + (width - ml - mr) / 2) << "' y='" << (height - 12)
      << "' text-anchor='middle' font-family='sans-serif' font-size='12'>"
      << (x_axis == XAxis::comm_rounds ? "communication rounds" : "iterations") << "</text>\n";
  svg << "<text x='18' y='" << (mt + (height - mt - mb) / 2)
      << "' text-anchor='middle' font-family='sans-serif' font-size='12' "
      << "transform='rotate(-90 18 " << (mt + (height - mt - mb) / 2)
      << ")'>stationarity (log)</text>\n";

  std::size_t ci = 0;
  for (const RunReport& r : runs) {
    const char* color = kPalette[ci % 8];
    std::ostringstream pts;
    for (const TraceRecord& t : r.trace) {
      const double x = x_axis == XAxis::comm_rounds ? static_cast<double>(t.comm_rounds)
                                                    : static_cast<double>(t.k);
      const double y = std::log10(std::max(t.grad_norm_avg_point + t.avg_grad_norm, 1e-300));
      pts << px(x) << ',' << py(y) << ' ';
    }
    svg << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='"
        << pts.str() << "'/>\n";
    const double ly = mt + 16 + 18 * static_cast<double>(ci);
    svg << "<line x1='" << (width - mr + 10) << "' y1='" << ly << "' x2='" << (width - mr + 34)
        << "' y2='" << ly << "' stroke='" << color << "' stroke-width='2'/>\n";
    svg << "<text x='" << (width - mr + 40) << "' y='" << (ly + 4)
        << "' font-family='sans-serif' font-size='11'>" << to_string(r.spec.algorithm)
        << " T_o=" << r.spec.T_o << "</text>\n";
    ++ci;
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace detail

inline ExperimentOutcome run_experiment(const ExperimentConfig& cfg,
                                        StepObserver* observer = nullptr) {
  ExperimentOutcome outcome;
  if (cfg.runs.empty()) {
    outcome.warning = "config has an empty run list; nothing to do";
    return outcome;
  }

  const Graph graph = cfg.topology.edge_list.empty()
                          ? build_graph(cfg.topology.kind, cfg.topology.n)
                          : load_edge_list(cfg.topology.edge_list);
  const MixingMatrix mixing = metropolis_weights(graph);
  outcome.lambda = mixing.lambda();
  outcome.lambda_bar = mixing.lambda_bar();

  RegLSData data = cfg.objective.dataset.empty()
                       ? generate_synthetic(cfg.objective.seed, cfg.objective.n, cfg.objective.p,
                                            cfg.objective.m, cfg.objective.noise_scale,
                                            cfg.objective.hetero_scale, cfg.objective.rho)
                       : load_dataset(cfg.objective.dataset);
  if (!cfg.objective.dataset.empty()) data.rho = cfg.objective.rho;
  const RegLSObjective obj(std::move(data), cfg.objective.ls_scale, cfg.objective.regularizer);
  if (obj.num_agents() != graph.n())
    throw ConfigError("objective has " + std::to_string(obj.num_agents()) +
                      " agents but the topology has " + std::to_string(graph.n()));

  const std::vector<double> x0(obj.dim(), 0.0);
  outcome.smoothness = obj.smoothness();
  outcome.zeta_0 = zeta0(obj, x0);
  double f0 = 0.0;
  for (std::size_t i = 0; i < obj.num_agents(); ++i) f0 += obj.value(i, x0);
  outcome.f_0 = f0 / static_cast<double>(obj.num_agents());

  // Resolve step sizes and gate on the admissibility conditions first so a
  // bad config refuses before any artifact is written.
  std::vector<RunReport> reports;
  for (std::size_t idx = 0; idx < cfg.runs.size(); ++idx) {
    const RunSpec& spec = cfg.runs[idx];
    RunReport rep;
    rep.spec = spec;
    if (spec.eta) {
      rep.eta = *spec.eta;
      rep.alpha = *spec.alpha;
    } else {
      std::tie(rep.eta, rep.alpha) =
          split_eta_alpha(*spec.eta_alpha, mixing.lambda(), spec.T_o, obj.smoothness());
    }
    rep.eta_bound = eta_max(mixing.lambda(), spec.T_o);
    rep.theta_value = theta(mixing.lambda(), rep.eta, spec.T_o);
    std::string violated;
    if (!(rep.eta < rep.eta_bound))
      violated = "eta = " + std::to_string(rep.eta) + " >= eta_max = " +
                 std::to_string(rep.eta_bound);
    if (violated.empty() && !(rep.theta_value < 1.0))
      violated = "theta = " + std::to_string(rep.theta_value) + " >= 1";
    if (violated.empty()) {
      rep.alpha_bound = alpha_max(mixing.lambda(), rep.eta, spec.T_o, obj.smoothness());
      if (!(rep.alpha <= rep.alpha_bound.value))
        violated = "alpha = " + std::to_string(rep.alpha) + " > alpha_max = " +
                   std::to_string(rep.alpha_bound.value) + " (binding term " +
                   rep.alpha_bound.binding_name() + ")";
    }
    rep.admissible = violated.empty();
    rep.violated = violated;
    if (!rep.admissible && !spec.override_admissibility)
      throw ConfigError("runs[" + std::to_string(idx) +
                        "] violates the step-size conditions: " + violated +
                        "; set \"override\": true to run anyway");
    char name[96];
    std::snprintf(name, sizeof name, "run%02zu_%s_To%ld.csv", idx, to_string(spec.algorithm),
                  spec.T_o);
    rep.csv_file = name;
    reports.push_back(std::move(rep));
  }

  const std::filesystem::path out_dir(cfg.output_dir);
  std::filesystem::create_directories(out_dir);

  for (RunReport& rep : reports) {
    RunConfig rc;
    rc.algorithm = rep.spec.algorithm;
    rc.eta = rep.eta;
    rc.alpha = rep.alpha;
    rc.schedule = Schedule{rep.spec.T_o, rep.spec.K};
    rc.record_every = rep.spec.record_every;
    RunResult res = run(rc, mixing, obj, x0, observer);
    rep.diverged = res.diverged;
    rep.divergence_iteration = res.divergence_iteration;
    rep.comm_rounds = res.final_state.comm_rounds;
    if (!res.trace.empty()) {
      rep.final_record = res.trace.back();
      rep.wallclock = res.trace.back().wallclock;
    }
    outcome.any_divergence = outcome.any_divergence || res.diverged;

    TheoryParams tp;
    tp.lambda = mixing.lambda();
    tp.T_o = rep.spec.T_o;
    tp.eta = rep.eta;
    tp.alpha = rep.alpha;
    tp.L = obj.smoothness();
    tp.n = obj.num_agents();
    tp.K = rep.spec.K;
    tp.f_tilde_0 = outcome.f_0 - cfg.objective.f_star_lower;
    tp.zeta_0 = outcome.zeta_0;
    rep.rate_bound_at_K = rate_rhs(tp);

    detail::write_atomic(out_dir / rep.csv_file, detail::trace_to_csv(res.trace));
    rep.trace = std::move(res.trace);
  }

  // summary.json: final metrics plus the spectral and theory reports
  nlohmann::ordered_json summary;
  summary["topology"] = {{"kind", to_string(graph.kind())},
                         {"n", graph.n()},
                         {"edges", graph.edges().size()},
                         {"lambda", mixing.lambda()},
                         {"lambda_bar", mixing.lambda_bar()}};
  summary["objective"] = {{"n", obj.num_agents()},
                          {"p", obj.data().p},
                          {"m", obj.data().m},
                          {"rho", obj.data().rho},
                          {"seed", obj.data().seed},
                          {"ls_scale", obj.ls_scale()},
                          {"regularizer", to_string(obj.regularizer())},
                          {"L", obj.smoothness()},
                          {"zeta_0", outcome.zeta_0},
                          {"f_0", outcome.f_0},
                          {"f_star_lower", cfg.objective.f_star_lower}};
  summary["x_axis"] = cfg.x_axis == XAxis::comm_rounds ? "comm_rounds" : "iterations";
  summary["runs"] = nlohmann::ordered_json::array();
  for (const RunReport& rep : reports) {
    nlohmann::ordered_json jr;
    jr["csv"] = rep.csv_file;
    jr["algorithm"] = to_string(rep.spec.algorithm);
    jr["T_o"] = rep.spec.T_o;
    jr["K"] = rep.spec.K;
    jr["record_every"] = rep.spec.record_every;
    jr["eta"] = rep.eta;
    jr["alpha"] = rep.alpha;
    jr["eta_alpha"] = rep.eta * rep.alpha;
    jr["admissible"] = rep.admissible;
    jr["override"] = rep.spec.override_admissibility;
    if (!rep.admissible) jr["violated"] = rep.violated;
    jr["eta_max"] = rep.eta_bound;
    jr["theta"] = rep.theta_value;
    if (rep.admissible || rep.theta_value < 1.0) {
      const AlphaBound& ab =
          rep.alpha_bound.value > 0.0
              ? rep.alpha_bound
              : alpha_max(mixing.lambda(), rep.eta, rep.spec.T_o, obj.smoothness());
      jr["alpha_max"] = ab.value;
      jr["alpha_binding_term"] = ab.binding_name();
      const Lemma5Constants l5 = lemma5_constants(mixing.lambda(), rep.eta, rep.alpha,
                                                  rep.spec.T_o, obj.smoothness(),
                                                  obj.num_agents());
      jr["lemma5"] = {{"e1", l5.e1}, {"e2", l5.e2}};
      jr["rate_rhs_at_K"] = rep.rate_bound_at_K;
    }
    jr["diverged"] = rep.diverged;
    if (rep.diverged) jr["divergence_iteration"] = rep.divergence_iteration;
    jr["comm_rounds"] = rep.comm_rounds;
    jr["vector_transmissions"] = 2 * rep.comm_rounds * static_cast<long>(graph.edges().size());
    jr["wallclock_s"] = rep.wallclock;
    jr["final"] = {{"k", rep.final_record.k},
                   {"grad_norm_avg_point", rep.final_record.grad_norm_avg_point},
                   {"avg_grad_norm", rep.final_record.avg_grad_norm},
                   {"consensus_x", rep.final_record.consensus_x},
                   {"consensus_y", rep.final_record.consensus_y},
                   {"phi_sq", rep.final_record.phi_sq},
                   {"f_value", rep.final_record.f_value}};
    summary["runs"].push_back(std::move(jr));
  }
  outcome.summary_path = out_dir / "summary.json";
  detail::write_atomic(outcome.summary_path, summary.dump(2) + "\n");

  if (cfg.plot) {
    const std::string title = std::string(to_string(graph.kind())) + " graph, n = " +
                              std::to_string(graph.n());
    outcome.plot_path = out_dir / (std::string("plot_") + to_string(graph.kind()) + ".svg");
    detail::write_atomic(outcome.plot_path, detail::svg_plot(reports, cfg.x_axis, title));
  }

  outcome.runs = std::move(reports);
  return outcome;
}

}  // namespace gtsim

// Command-line front end: experiment runner, spectral report, step-size
// bound calculator, and synthetic dataset generator.
//
// Exit codes: 0 success, 1 configuration error, 2 divergence in any run.

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "gtsim/gtsim.hpp"

namespace {

int cmd_run(const std::string& config_path) {
  gtsim::ExperimentConfig cfg = gtsim::load_experiment_config(config_path);
  if (const char* dir = std::getenv("GTSIM_OUTPUT_DIR"); dir && *dir) cfg.output_dir = dir;

  gtsim::ExperimentOutcome out = gtsim::run_experiment(cfg);
  if (!out.warning.empty()) {
    std::cerr << "warning: " << out.warning << "\n";
    return 0;
  }
  std::printf("lambda = %.12g  lambda_bar = %.12g  L = %.12g  zeta_0 = %.12g  f(0) = %.12g\n",
              out.lambda, out.lambda_bar, out.smoothness, out.zeta_0, out.f_0);
  for (const gtsim::RunReport& r : out.runs) {
    std::printf("%-28s T_o=%-3ld eta=%-11.4g alpha=%-11.4g rounds=%-7ld %s%s\n", r.csv_file.c_str(),
                r.spec.T_o, r.eta, r.alpha, r.comm_rounds,
                r.admissible ? "admissible" : "override",
                r.diverged ? "  DIVERGED" : "");
  }
  std::printf("summary: %s\n", out.summary_path.string().c_str());
  if (!out.plot_path.empty()) std::printf("plot:    %s\n", out.plot_path.string().c_str());
  return out.any_divergence ? 2 : 0;
}

int cmd_spectrum(const std::string& topology, std::size_t n) {
  const gtsim::Graph g = gtsim::build_graph(gtsim::graph_kind_from_string(topology), n);
  const gtsim::MixingMatrix w = gtsim::metropolis_weights(g);
  const gtsim::MixingValidation v = gtsim::validate_mixing(w.w(), 1e-12);
  std::printf("topology: %s  n=%zu  edges=%zu\n", topology.c_str(), g.n(), g.edges().size());
  std::printf("lambda      = %.15g\n", w.lambda());
  std::printf("lambda_bar  = %.15g\n", w.lambda_bar());
  std::printf("eigenvalues = [%.15g, %.15g, ..., %.15g]\n", w.eigenvalues().front(),
              w.eigenvalues().size() > 1 ? w.eigenvalues()[1] : 0.0, w.eigenvalues().back());
  std::printf("validation  : symmetry %.3g, row-sum %.3g, negativity %.3g -> %s at 1e-12\n",
              v.symmetry_defect, v.row_sum_defect, v.negativity_defect,
              v.pass ? "pass" : "FAIL");
  std::printf("remark2 well-connected regime: %s\n", gtsim::remark2_regime(w.lambda()) ? "yes" : "no");
  return 0;
}

int cmd_bounds(double lambda, long T_o, double L, double eta_opt) {
  const double emax = gtsim::eta_max(lambda, T_o);
  std::printf("eta_max(lambda=%.6g, T_o=%ld) = %.15g\n", lambda, T_o, emax);
  const double eta = eta_opt > 0.0 ? eta_opt : 0.5 * emax;
  std::printf("eta = %.15g%s\n", eta, eta_opt > 0.0 ? "" : "  (default: eta_max/2)");
  if (!(eta < emax)) {
    std::fprintf(stderr, "error: eta must be below eta_max\n");
    return 1;
  }
  const double th = gtsim::theta(lambda, eta, T_o);
  const gtsim::AlphaBound ab = gtsim::alpha_max(lambda, eta, T_o, L);
  std::printf("theta = %.15g\n", th);
  std::printf("alpha_max = %.15g  (binding: %s)\n", ab.value, ab.binding_name());
  std::printf("  theorem terms: [%.6g, %.6g, %.6g, %.6g]\n", ab.terms[0], ab.terms[1],
              ab.terms[2], ab.terms[3]);
  const auto l5t = gtsim::lemma5_alpha_terms(lambda, eta, T_o, L);
  std::printf("  consensus-inequality terms: [%.6g, %.6g]\n", l5t[0], l5t[1]);
  const gtsim::Lemma5Constants c =
      gtsim::lemma5_constants(lambda, eta, ab.value, T_o, L, 1);
  std::printf("e1(alpha=alpha_max, n=1) = %.6g   e2 = %.6g\n", c.e1, c.e2);
  std::printf("1 - lambda_bar - e1*T_o = %.6g\n",
              1.0 - c.lambda_bar - c.e1 * static_cast<double>(T_o));
  std::printf("remark2 well-connected regime: %s\n", gtsim::remark2_regime(lambda) ? "yes" : "no");
  return 0;
}

int cmd_gen_data(const std::string& params_path, const std::string& out_path) {
  std::ifstream in(params_path);
  if (!in) throw gtsim::ConfigError("cannot open params file '" + params_path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw gtsim::ConfigError("params '" + params_path + "': " + e.what());
  }
  auto get = [&](const char* key, double fallback, bool required = false) {
    if (!j.contains(key)) {
      if (required) throw gtsim::ConfigError(std::string("params: missing field '") + key + "'");
      return fallback;
    }
    return j.at(key).get<double>();
  };
  const auto seed = static_cast<std::uint64_t>(get("seed", 0, true));
  const auto n = static_cast<std::size_t>(get("n", 0, true));
  const auto p = static_cast<std::size_t>(get("p", 500));
  const auto m = static_cast<std::size_t>(get("m", 20));
  const double rho = get("rho", 0.0);
  const double noise = get("noise_scale", 0.1);
  const double hetero = get("hetero_scale", 0.1);

  const gtsim::RegLSData data = gtsim::generate_synthetic(seed, n, p, m, noise, hetero, rho);
  gtsim::save_dataset(data, out_path);
  const gtsim::RegLSObjective obj(data);
  const std::vector<double> x0(m, 0.0);
  std::printf("wrote %s: n=%zu p=%zu m=%zu rho=%g seed=%llu\n", out_path.c_str(), n, p, m, rho,
              static_cast<unsigned long long>(seed));
  std::printf("L = %.12g  zeta_0(x=0) = %.12g\n", obj.smoothness(), gtsim::zeta0(obj, x0));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized gradient-tracking simulator"};
  app.require_subcommand(1);

  std::string config_path;
  CLI::App* run = app.add_subcommand("run", "execute an experiment config");
  run->add_option("config", config_path, "JSON experiment config")->required();

  std::string topology;
  std::size_t n = 0;
  CLI::App* spec = app.add_subcommand("spectrum", "spectral report for a topology");
  spec->add_option("topology", topology, "ring|star|grid2d|complete")->required();
  spec->add_option("n", n, "agent count")->required();

  double lambda = 0.0, L = 1.0, eta_opt = -1.0;
  long T_o = 1;
  CLI::App* bounds = app.add_subcommand("bounds", "step-size bounds and rate constants");
  bounds->add_option("lambda", lambda, "mixing rate in [0,1)")->required();
  bounds->add_option("T_o", T_o, "local-update period")->required();
  bounds->add_option("L", L, "smoothness constant")->required();
  bounds->add_option("--eta", eta_opt, "evaluate alpha bounds at this eta");

  std::string params_path, out_path;
  CLI::App* gen = app.add_subcommand("gen-data", "generate a synthetic dataset");
  gen->add_option("params", params_path, "JSON with seed,n[,p,m,rho,noise_scale,hetero_scale]")
      ->required();
  gen->add_option("out", out_path, "output dataset path")->required();

  try {
    app.parse(argc, argv);
    if (run->parsed()) return cmd_run(config_path);
    if (spec->parsed()) return cmd_spectrum(topology, n);
    if (bounds->parsed()) return cmd_bounds(lambda, T_o, L, eta_opt);
    if (gen->parsed()) return cmd_gen_data(params_path, out_path);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const gtsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gtsim/experiment.hpp"

using namespace gtsim;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  return dir;
}

ExperimentConfig small_config(const std::string& out_name) {
  ExperimentConfig cfg;
  cfg.topology.kind = GraphKind::ring;
  cfg.topology.n = 5;
  cfg.objective.seed = 3;
  cfg.objective.n = 5;
  cfg.objective.p = 20;
  cfg.objective.m = 4;
  cfg.objective.rho = 0.01;
  cfg.output_dir = fresh_dir(out_name).string();
  RunSpec r;
  r.algorithm = AlgorithmKind::lu_gt;
  r.T_o = 2;
  r.eta_alpha = 1e-4;
  r.K = 50;
  r.record_every = 1;
  r.override_admissibility = true;
  cfg.runs.push_back(r);
  return cfg;
}

}  // namespace

TEST_CASE("split_eta_alpha") {
  // lambda = 0, T_o = 1: eta = 0.9 and alpha carries the rest
  auto [eta, alpha] = split_eta_alpha(2e-3, 0.0, 1, 1.0);
  CHECK(eta == 0.9);
  CHECK(alpha == 2e-3 / 0.9);

  // doubling T_o exactly halves eta and doubles alpha
  auto [eta2, alpha2] = split_eta_alpha(2e-3, 0.0, 2, 1.0);
  CHECK(eta2 == eta / 2.0);
  CHECK(alpha2 == alpha * 2.0);

  // the split never violates the eta bound
  for (double l : {0.0, 0.3, 0.916, 0.979}) {
    for (long To : {1L, 2L, 5L, 10L, 50L}) {
      auto [e, a] = split_eta_alpha(1e-5, l, To, 1.0);
      CHECK(e < eta_max(l, To));
      CHECK(e * a == Catch::Approx(1e-5).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(split_eta_alpha(0.0, 0.5, 1, 1.0), ConfigError);
  CHECK_THROWS_AS(split_eta_alpha(-1e-3, 0.5, 1, 1.0), ConfigError);
}

TEST_CASE("config parsing") {
  const auto j = nlohmann::json::parse(R"({
    "topology": {"kind": "ring", "n": 25},
    "objective": {"seed": 1, "n": 25, "p": 100, "m": 10, "rho": 0.01, "ls_scale": 0.5},
    "runs": [
      {"algorithm": "lu_gt", "T_o": 5, "eta_alpha": 2e-5, "K": 100, "override": true},
      {"algorithm": "dgd_local", "T_o": 5, "eta": 0.1, "alpha": 0.001, "K": 100, "record_every": 10, "override": true}
    ],
    "output_dir": "somewhere",
    "plot": false,
    "x_axis": "iterations"
  })");
  const ExperimentConfig cfg = parse_experiment_config(j);
  CHECK(cfg.topology.kind == GraphKind::ring);
  CHECK(cfg.topology.n == 25);
  CHECK(cfg.objective.ls_scale == 0.5);
  REQUIRE(cfg.runs.size() == 2);
  CHECK(cfg.runs[0].eta_alpha.value() == 2e-5);
  CHECK_FALSE(cfg.runs[0].eta.has_value());
  CHECK(cfg.runs[1].eta.value() == 0.1);
  CHECK(cfg.runs[1].record_every == 10);
  CHECK(cfg.x_axis == XAxis::iterations);
  CHECK_FALSE(cfg.plot);
}

TEST_CASE("config parse errors name the offending field") {
  auto parse = [](const char* text) { return parse_experiment_config(nlohmann::json::parse(text)); };
  CHECK_THROWS_WITH(parse(R"({"objective": {}, "runs": []})"),
                    Catch::Matchers::ContainsSubstring("topology"));
  CHECK_THROWS_WITH(parse(R"({"topology": {"kind": "ring"}, "objective": {}, "runs": []})"),
                    Catch::Matchers::ContainsSubstring("'n'"));
  CHECK_THROWS_WITH(
      parse(R"({"topology": {"kind": "ring", "n": 4}, "objective": {"seed": 1, "n": 4},
               "runs": [{"algorithm": "lu_gt", "K": 10}]})"),
      Catch::Matchers::ContainsSubstring("eta_alpha"));
  CHECK_THROWS_WITH(
      parse(R"({"topology": {"kind": "ring", "n": 4}, "objective": {"seed": 1, "n": 4},
               "runs": [{"algorithm": "lu_gt", "K": 10, "eta": 0.1}]})"),
      Catch::Matchers::ContainsSubstring("together"));
  CHECK_THROWS_WITH(
      parse(R"({"topology": {"kind": "hexagon", "n": 4}, "objective": {"seed": 1, "n": 4},
               "runs": []})"),
      Catch::Matchers::ContainsSubstring("hexagon"));
}

TEST_CASE("empty run list warns and writes nothing") {
  ExperimentConfig cfg = small_config("gtsim_empty");
  cfg.runs.clear();
  const ExperimentOutcome out = run_experiment(cfg);
  CHECK_FALSE(out.warning.empty());
  CHECK_FALSE(fs::exists(cfg.output_dir));
}

TEST_CASE("inadmissible runs are refused unless overridden") {
  ExperimentConfig cfg = small_config("gtsim_refuse");
  cfg.runs[0].override_admissibility = false;
  cfg.runs[0].eta = 0.5;  // far above eta_max for a ring
  cfg.runs[0].alpha = 0.5;
  cfg.runs[0].eta_alpha.reset();
  try {
    run_experiment(cfg);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("eta") != std::string::npos);
    CHECK(msg.find("override") != std::string::npos);
  }
  CHECK_FALSE(fs::exists(cfg.output_dir));  // refused before writing artifacts
}

TEST_CASE("admissible runs need no override") {
  ExperimentConfig cfg = small_config("gtsim_admissible");
  cfg.runs[0].override_admissibility = false;
  cfg.runs[0].eta_alpha.reset();
  // pick steps inside the bounds computed for this topology/objective
  const MixingMatrix w = metropolis_weights(build_graph(GraphKind::ring, 5));
  const RegLSObjective obj(generate_synthetic(3, 5, 20, 4, 0.1, 0.1, 0.01));
  const double eta = 0.5 * eta_max(w.lambda(), 2);
  cfg.runs[0].eta = eta;
  cfg.runs[0].alpha = 0.9 * alpha_max(w.lambda(), eta, 2, obj.smoothness()).value;
  const ExperimentOutcome out = run_experiment(cfg);
  REQUIRE(out.runs.size() == 1);
  CHECK(out.runs[0].admissible);
  CHECK_FALSE(out.any_divergence);
  fs::remove_all(cfg.output_dir);
}

TEST_CASE("experiment artifacts: csv schema, row count, summary, plot") {
  ExperimentConfig cfg = small_config("gtsim_artifacts");
  cfg.runs[0].record_every = 7;
  cfg.runs[0].K = 50;
  const ExperimentOutcome out = run_experiment(cfg);
  REQUIRE(out.runs.size() == 1);

  const fs::path csv = fs::path(cfg.output_dir) / out.runs[0].csv_file;
  REQUIRE(fs::exists(csv));
  const std::string text = read_file(csv);
  CHECK(text.rfind("k,comm_rounds,grad_norm_avg_point,avg_grad_norm,consensus_x,consensus_y,"
                   "phi_sq,f_value\n", 0) == 0);
  const std::size_t rows = std::count(text.begin(), text.end(), '\n') - 1;
  CHECK(rows == static_cast<std::size_t>((50 + 6) / 7) + 1);  // ceil(K/record_every) + 1

  REQUIRE(fs::exists(out.summary_path));
  const auto summary = nlohmann::json::parse(read_file(out.summary_path));
  CHECK(summary.at("topology").at("lambda").get<double>() > 0.0);
  CHECK(summary.at("objective").at("L").get<double>() > 0.0);
  CHECK(summary.at("runs").size() == 1);
  CHECK(summary.at("runs")[0].at("comm_rounds").get<long>() == 25);
  CHECK(summary.at("runs")[0].contains("rate_rhs_at_K"));

  REQUIRE(fs::exists(out.plot_path));
  const std::string svg = read_file(out.plot_path);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
  fs::remove_all(cfg.output_dir);
}

TEST_CASE("identical configs produce byte-identical CSVs") {
  ExperimentConfig cfg = small_config("gtsim_det_a");
  const ExperimentOutcome a = run_experiment(cfg);
  const std::string first = read_file(fs::path(cfg.output_dir) / a.runs[0].csv_file);
  fs::remove_all(cfg.output_dir);

  ExperimentConfig cfg2 = small_config("gtsim_det_b");
  const ExperimentOutcome b = run_experiment(cfg2);
  const std::string second = read_file(fs::path(cfg2.output_dir) / b.runs[0].csv_file);
  fs::remove_all(cfg2.output_dir);

  CHECK(first == second);
}

TEST_CASE("objective can come from a saved dataset") {
  const fs::path data_path = fs::temp_directory_path() / "gtsim_exp_dataset.bin";
  save_dataset(generate_synthetic(8, 4, 15, 3, 0.1, 0.1, 0.0), data_path);

  ExperimentConfig cfg;
  cfg.topology.kind = GraphKind::complete;
  cfg.topology.n = 4;
  cfg.objective.dataset = data_path.string();
  cfg.objective.rho = 0.0;
  cfg.output_dir = fresh_dir("gtsim_dataset_run").string();
  cfg.plot = false;
  RunSpec r;
  r.algorithm = AlgorithmKind::lu_gt;
  r.T_o = 1;
  r.eta_alpha = 1e-3;
  r.K = 20;
  r.override_admissibility = true;
  cfg.runs.push_back(r);
  const ExperimentOutcome out = run_experiment(cfg);
  CHECK(out.lambda < 1e-12);  // complete graph
  CHECK_FALSE(out.any_divergence);
  fs::remove_all(cfg.output_dir);
  fs::remove(data_path);
}

TEST_CASE("custom edge-list topology") {
  const fs::path edges = fs::temp_directory_path() / "gtsim_edges.txt";
  {
    std::ofstream out(edges);
    out << "4\n0 1\n1 2\n2 3\n3 0\n";
  }
  ExperimentConfig cfg;
  cfg.topology.edge_list = edges.string();
  cfg.topology.kind = GraphKind::custom;
  cfg.objective.seed = 2;
  cfg.objective.n = 4;
  cfg.objective.p = 10;
  cfg.objective.m = 3;
  cfg.output_dir = fresh_dir("gtsim_custom_topo").string();
  cfg.plot = false;
  RunSpec r;
  r.algorithm = AlgorithmKind::lu_gt;
  r.T_o = 1;
  r.eta_alpha = 1e-4;
  r.K = 10;
  r.override_admissibility = true;
  cfg.runs.push_back(r);
  const ExperimentOutcome out = run_experiment(cfg);
  CHECK(out.runs.size() == 1);
  fs::remove_all(cfg.output_dir);
  fs::remove(edges);
}

TEST_CASE("divergent run is flagged in the outcome and summary") {
  ExperimentConfig cfg = small_config("gtsim_diverge");
  cfg.runs[0].eta = 0.9;
  cfg.runs[0].alpha = 10.0;  // absurd step: guaranteed blow-up
  cfg.runs[0].eta_alpha.reset();
  cfg.runs[0].override_admissibility = true;
  cfg.runs[0].K = 2000;
  const ExperimentOutcome out = run_experiment(cfg);
  CHECK(out.any_divergence);
  CHECK(out.runs[0].diverged);
  const auto summary = nlohmann::json::parse(read_file(out.summary_path));
  CHECK(summary.at("runs")[0].at("diverged").get<bool>());
  fs::remove_all(cfg.output_dir);
}

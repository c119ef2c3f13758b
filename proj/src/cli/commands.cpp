#include "selfsync/cli/commands.hpp"

#include "selfsync/cli/montecarlo.hpp"
#include "selfsync/error.hpp"
#include "selfsync/protocols.hpp"
#include "selfsync/spectral.hpp"
#include "selfsync/stats.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace selfsync::cli {

namespace {

using io::Json;
namespace fs = std::filesystem;

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Eigen::VectorXd coupling_gains(const Scenario& s) {
  return s.sim.k_gain * s.sim.weights_for(s.graph.size()).cwiseInverse();
}

// No-delay spectrum rate (QSC), kappa bound (SC) and, for a globally
// synchronized trajectory, the empirical fit.
Json rates_json(const Scenario& s, const Trajectory* traj) {
  Json rates = Json::array();
  const auto L = coupling_laplacian(s.graph, coupling_gains(s));
  const auto scc = scc_decompose(s.graph);
  if (scc.is_qsc()) rates.push_back(io::rate_to_json(rate_no_delay(L)));
  if (scc.connectivity == Connectivity::StronglyConnected) {
    rates.push_back(io::rate_to_json(rate_kappa_bound(L, gamma_left_eigenvector(L, scc))));
  }
  if (traj && traj->sync && traj->sync->global) {
    rates.push_back(io::rate_to_json(empirical_rate(*traj, traj->sync->clusters.front().value)));
  }
  return rates;
}

Json scenario_header(const Scenario& s) {
  const auto scc = scc_decompose(s.graph);
  return Json{{"digest", scenario_digest(s)},
              {"seed", s.seed},
              {"label", s.label},
              {"n", s.graph.size()},
              {"edges", s.graph.edge_count()},
              {"connectivity", to_string(scc.connectivity)},
              {"tau_max", s.delays.tau_max()},
              {"T_s", s.sim.t_step},
              {"K", s.sim.k_gain},
              {"horizon", s.sim.horizon}};
}

// Pairs every predicted cluster with the measured cluster holding its roots.
Json compare_clusters(const ConsensusPrediction& pred, const SyncResult& sync) {
  Json out = Json::array();
  for (const auto& pc : pred.per_cluster) {
    Json row{{"root_nodes", pc.root_nodes}, {"predicted", pc.omega(0)}};
    const SyncCluster* hit = nullptr;
    for (const auto& mc : sync.clusters)
      if (std::find(mc.nodes.begin(), mc.nodes.end(), pc.root_nodes.front()) != mc.nodes.end()) hit = &mc;
    if (hit) {
      row["measured"] = hit->value(0);
      row["cluster_size"] = hit->nodes.size();
      row["relative_error"] = std::abs(hit->value(0) - pc.omega(0)) / std::max(std::abs(pc.omega(0)), 1e-300);
    } else {
      row["measured"] = nullptr;
    }
    out.push_back(std::move(row));
  }
  return out;
}

ConsensusOracle make_oracle(const Scenario& s, const SimConfig& sim, const RunOptions& opts) {
  if (opts.simulate_passes) return simulation_oracle(s.graph, s.delays, sim, s.sync);
  return prediction_oracle(s.graph, s.delays, sim);
}

void write_report(const fs::path& dir, const Json& report) {
  fs::create_directories(dir);
  io::write_document((dir / "report.json").string(), report);
}

}  // namespace

int cmd_gen(const std::string& config_path, const std::string& out_dir, std::optional<std::uint64_t> seed,
            std::ostream& out) {
  auto cfg = parse_scenario_config(read_text(config_path));
  if (seed) cfg.seed = *seed;
  const auto s = generate_scenario(cfg);
  write_scenario(s, out_dir);
  const auto scc = scc_decompose(s.graph);
  out << "scenario " << scenario_digest(s) << ": n=" << s.graph.size() << " edges=" << s.graph.edge_count()
      << " class=" << to_string(scc.connectivity) << " tau_max=" << s.delays.tau_max() << " -> " << out_dir << '\n';
  return kExitOk;
}

io::Json inspect_report(const Scenario& s) {
  const auto L = laplacian(s.graph);
  const auto scc = scc_decompose(s.graph);
  Json gammas = Json::array();
  for (const auto& gv : gamma_per_root(L, scc)) {
    gammas.push_back(Json{{"support", gv.support}, {"gamma", io::vector_to_json(gv.gamma)}, {"residual", gv.residual}});
  }
  return Json{{"schema", "selfsync.inspect/1"},
              {"scenario", scenario_header(s)},
              {"balanced", is_balanced(s.graph)},
              {"zero_eigenvalue_multiplicity", zero_eigen_multiplicity(L)},
              {"scc", io::scc_to_json(scc)},
              {"gamma", std::move(gammas)},
              {"rate_bounds", rates_json(s, nullptr)}};
}

int cmd_inspect(const std::string& scenario_dir, std::ostream& out) {
  out << inspect_report(read_scenario(scenario_dir)).dump(2) << '\n';
  return kExitOk;
}

int cmd_run(const std::string& scenario_dir, const RunOptions& opts, std::ostream& out) {
  auto s = read_scenario(scenario_dir);
  if (opts.horizon) s.sim.horizon = *opts.horizon;
  SimConfig sim = s.sim;
  if (opts.seed) sim.rng_seed = *opts.seed;
  if (opts.noise_std) sim.noise_std = *opts.noise_std;
  const fs::path dir = opts.out_dir.empty() ? fs::path(scenario_dir) : fs::path(opts.out_dir);

  Json report{{"schema", "selfsync.report/1"}, {"mode", opts.mode}, {"scenario", scenario_header(s)}};
  const auto scc = scc_decompose(s.graph);
  int code = kExitOk;

  if (opts.mode == "simulate") {
    auto traj = simulate(s.graph, s.delays, sim, s.g_values);
    auto sync = detect_sync(traj, s.sync);
    if (opts.tol || opts.window) {
      sync = detect_sync(traj, opts.tol.value_or(sync.tol), opts.window.value_or(sync.window));
    }
    traj.sync = sync;
    // The simulator applies delays rounded to whole steps; predict for those.
    const auto pred = predict_clusters(s.graph, s.delays.quantized(sim.t_step), sim, s.g_values);
    report["noise_std"] = sim.noise_std;
    report["measured"] = io::sync_to_json(sync);
    report["predicted"] = io::prediction_to_json(pred);
    report["comparison"] = compare_clusters(pred, sync);
    report["rates"] = rates_json(s, &traj);
    report["traces"] = Json{{"trajectory", "trace.csv"}};
    fs::create_directories(dir);
    std::ofstream csv(dir / "trace.csv");
    if (!csv) throw Error("cannot write '" + (dir / "trace.csv").string() + "'");
    io::write_trajectory_csv(csv, traj, opts.downsample);
    if (sync.clusters.empty() || (scc.is_qsc() && !sync.global)) code = kExitNoSync;
    out << "simulate: " << sync.clusters.size() << " cluster(s), global=" << (sync.global ? "true" : "false");
    if (sync.global) out << ", omega*=" << sync.clusters.front().value(0);
    out << '\n';
  } else if (opts.mode == "predict") {
    const auto pred = predict_clusters(s.graph, s.delays, sim, s.g_values);
    report["predicted"] = io::prediction_to_json(pred);
    if (pred.global) report["intercepts"] = io::vector_to_json(predict_intercepts(s.graph, s.delays, sim, s.g_values));
    report["rates"] = rates_json(s, nullptr);
    out << "predict: " << pred.per_cluster.size() << " root cluster(s), global=" << (pred.global ? "true" : "false");
    if (pred.global) out << ", omega*=" << pred.scalar();
    out << '\n';
  } else if (opts.mode == "unbias2") {
    const auto oracle = make_oracle(s, sim, opts);
    const auto r = two_step_unbias(oracle, s.g_values, sim.weights_for(s.graph.size()));
    const auto undelayed = predict_consensus(s.graph, DelayMatrix::zeros(s.graph.size()), sim, s.g_values);
    report["passes"] = opts.simulate_passes ? "simulated" : "predicted";
    report["unbias"] = io::unbias_to_json(r);
    report["expected_ratio"] = undelayed.scalar();
    out << "unbias2: ratio=" << r.ratio << " expected=" << undelayed.scalar() << '\n';
  } else if (opts.mode == "gamma_protocol") {
    if (!scc.is_qsc()) throw TopologyError("gamma protocol requires a QSC digraph");
    const auto oracle = make_oracle(s, sim, opts);
    const auto c = sim.weights_for(s.graph.size());
    const auto r = gamma_estimation_protocol(oracle, scc.root_nodes(), s.g_values, c);
    const double target = consensus_function([](double v) { return v; }, s.g_values, c);
    report["passes"] = opts.simulate_passes ? "simulated" : "predicted";
    report["unbias"] = io::unbias_to_json(r);
    report["target"] = target;
    out << "gamma_protocol: ratio=" << r.ratio << " target=" << target << " passes=" << r.passes << '\n';
  } else {
    throw ConfigError("unknown mode '" + opts.mode + "'");
  }
  write_report(dir, report);
  return code;
}

int cmd_montecarlo(const std::string& config_path, std::optional<std::size_t> trials, const std::string& out_dir,
                   std::ostream& out) {
  auto cfg = parse_montecarlo_config(read_text(config_path));
  if (trials) {
    if (*trials == 0) throw ConfigError("--trials must be at least 1");
    cfg.trials = *trials;
  }
  const auto r = run_montecarlo(cfg);
  fs::create_directories(out_dir);
  std::ofstream csv(fs::path(out_dir) / "curves.csv");
  if (!csv) throw Error("cannot write curves.csv in '" + out_dir + "'");
  write_curves_csv(csv, r);
  io::write_document((fs::path(out_dir) / "summary.json").string(), montecarlo_summary(r));
  out << "montecarlo: " << cfg.trials << " trial(s) in " << r.runtime_seconds << " s\n";
  for (const auto& c : r.cases) {
    out << "  " << c.name << ": mean=" << c.final_mean << " var=" << c.final_variance
        << " bias_vs_ml=" << r.bias_vs_ml(c.name) << '\n';
  }
  return kExitOk;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Self-synchronizing sensor network consensus tool"};
  app.require_subcommand(1);

  std::string gen_config, gen_out = ".";
  std::optional<std::uint64_t> gen_seed;
  auto* gen = app.add_subcommand("gen", "Generate scenario files from a config");
  gen->add_option("config", gen_config, "Scenario config (JSON)")->required();
  gen->add_option("--out-dir", gen_out, "Output directory");
  gen->add_option("--seed", gen_seed, "Override the config seed");

  std::string run_dir;
  RunOptions run_opts;
  auto* run = app.add_subcommand("run", "Simulate, predict or run a protocol on a scenario");
  run->add_option("scenario", run_dir, "Scenario directory")->required();
  run->add_option("--mode", run_opts.mode, "simulate | predict | unbias2 | gamma_protocol")
      ->check(CLI::IsMember({"simulate", "predict", "unbias2", "gamma_protocol"}));
  run->add_option("--horizon", run_opts.horizon, "Euler steps")->check(CLI::PositiveNumber);
  run->add_option("--tol", run_opts.tol, "Synchronization tolerance")->check(CLI::PositiveNumber);
  run->add_option("--window", run_opts.window, "Detection window in samples")->check(CLI::PositiveNumber);
  run->add_option("--seed", run_opts.seed, "Coupling-noise seed");
  run->add_option("--noise-std", run_opts.noise_std, "Coupling-noise standard deviation")->check(CLI::NonNegativeNumber);
  run->add_option("--out-dir", run_opts.out_dir, "Report directory (default: scenario directory)");
  run->add_option("--downsample", run_opts.downsample, "Write every k-th trace row")->check(CLI::PositiveNumber);
  run->add_flag("--simulate-passes", run_opts.simulate_passes, "Simulate every protocol pass");

  std::string mc_config, mc_out = ".";
  std::optional<std::size_t> mc_trials;
  auto* mc = app.add_subcommand("montecarlo", "Monte-Carlo estimation study");
  mc->add_option("config", mc_config, "Monte-Carlo config (JSON)")->required();
  mc->add_option("--trials", mc_trials, "Number of independent trials");
  mc->add_option("--out-dir", mc_out, "Output directory");

  std::string inspect_dir;
  auto* inspect = app.add_subcommand("inspect", "Connectivity class, gamma and rate bounds");
  inspect->add_option("scenario", inspect_dir, "Scenario directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitBadInput;
  }

  try {
    if (gen->parsed()) return cmd_gen(gen_config, gen_out, gen_seed, out);
    if (run->parsed()) return cmd_run(run_dir, run_opts, out);
    if (mc->parsed()) return cmd_montecarlo(mc_config, mc_trials, mc_out, out);
    return cmd_inspect(inspect_dir, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const SyncFailure& e) {
    err << "error: " << e.what() << '\n';
    return kExitNoSync;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace selfsync::cli

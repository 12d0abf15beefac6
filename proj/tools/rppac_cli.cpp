// Command-line front end: single runs, Monte Carlo error curves, spectral
// sweeps, invariant checks and graph summaries.
//
// Exit codes: 0 success, 1 validation failure or bad usage, 2 I/O error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rppac/rppac.hpp"
#include "rppac/spectrum_check.hpp"

namespace {

using namespace rppac;

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitIo = 2;

// Scenario flags are collected as strings so that a config file can be
// applied first and explicit flags layered on top.
struct ScenarioFlags {
  std::string graph_positional;
  std::string config_path;
  std::map<std::string, std::string> values;
  bool force_gamma = false;
  std::vector<std::pair<std::string, CLI::Option*>> options;

  void add(CLI::App* app, const std::string& key, const std::string& help) {
    options.emplace_back(key, app->add_option("--" + key, values[key], help));
  }

  void attach(CLI::App* app, bool with_runs) {
    app->add_option("graph_file", graph_positional, "Edge-list file (same as --graph)");
    app->add_option("--config", config_path, "key=value file; explicit flags override it");
    add(app, "graph", "Edge-list file");
    add(app, "tau-bar", "Maximum link delay");
    add(app, "delay-kind", "zero | constant | uniform | trace");
    add(app, "trace", "Delay trace file for --delay-kind trace");
    add(app, "gamma", "Surplus gain");
    add(app, "iters", "Iterations K");
    if (with_runs) add(app, "runs", "Monte Carlo runs");
    add(app, "seed", "Base seed; run i uses seed + i");
    add(app, "init", "index | const:<v> | file:<path> | random");
    add(app, "out", "Output CSV path (stdout when omitted)");
    app->add_flag("--force-gamma", force_gamma, "Skip the gamma < min push weight check");
  }

  ScenarioConfig resolve() const {
    ScenarioConfig cfg;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw io_error("cannot open config file '" + config_path + "'");
      parse_config(in, cfg);
    }
    if (!graph_positional.empty()) cfg.graph_path = graph_positional;
    for (const auto& [key, opt] : options)
      if (opt->count() > 0) apply_setting(cfg, key, values.at(key));
    if (force_gamma) cfg.force_gamma = true;
    if (cfg.graph_path.empty()) throw config_error("no graph file given");
    validate(cfg);
    return cfg;
  }
};

Digraph load_and_warn(const std::string& path) {
  Digraph g = load_edge_list(path);
  if (!is_strongly_connected(g)) {
    std::cerr << "warning: graph is not strongly connected; average consensus is not expected\n";
  }
  return g;
}

template <typename Writer>
void emit(const std::string& path, Writer&& writer) {
  if (path.empty()) {
    writer(std::cout);
  } else {
    export_csv(path, writer);
  }
}

int cmd_run(const ScenarioFlags& flags) {
  const ScenarioConfig cfg = flags.resolve();
  const Digraph g = load_and_warn(cfg.graph_path);
  const Trajectory traj = run_scenario(cfg, g);
  emit(cfg.out_path, [&](std::ostream& os) { write_trajectory_csv(os, traj); });
  std::cerr << "final consensus error " << format_double(traj.error.back()) << "\n";
  return kExitOk;
}

int cmd_mc(const ScenarioFlags& flags) {
  const ScenarioConfig cfg = flags.resolve();
  const Digraph g = load_and_warn(cfg.graph_path);
  const std::vector<double> curve = monte_carlo(cfg, g);
  emit(cfg.out_path, [&](std::ostream& os) { write_curve_csv(os, curve); });
  return kExitOk;
}

int cmd_graph_info(const std::string& path) {
  const Digraph g = load_edge_list(path);
  const Eigen::MatrixXd C = build_push_weights(g);
  std::cout << "n=" << g.size() << "\n"
            << "m=" << g.edge_count() << "\n"
            << "strongly_connected=" << (is_strongly_connected(g) ? "true" : "false") << "\n"
            << "c_min=" << format_double(min_push_weight(C)) << "\n"
            << "node,in_degree,out_degree\n";
  for (NodeId j = 0; j < g.size(); ++j)
    std::cout << j + 1 << ',' << g.in_degree(j) << ',' << g.out_degree(j) << "\n";
  return kExitOk;
}

int cmd_check(const ScenarioFlags& flags) {
  const ScenarioConfig cfg = flags.resolve();
  const Digraph g = load_edge_list(cfg.graph_path);
  const DelaySchedule delays = scenario_schedule(cfg, g);
  const Eigen::VectorXd x0 = make_initial_state(cfg.init, g.size(), cfg.seed);
  const GammaCheck check = cfg.force_gamma ? GammaCheck::unchecked : GammaCheck::enforce_bound;

  std::cout << "strongly_connected=" << (is_strongly_connected(g) ? "true" : "false") << "\n";
  auto results = run_invariant_suite(g, delays, cfg.gamma, x0, cfg.iters, check);
  const SystemMatrices sm = build_snapshot_matrices(g, snapshot_at(delays, 0), cfg.gamma);
  const double mismatch = spectrum_union_mismatch(sm);
  results.push_back({"M0_spectrum_is_block_union", mismatch < 1e-8, format_double(mismatch)});

  bool all = true;
  for (const auto& r : results) {
    all = all && r.passed;
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name;
    if (!r.detail.empty()) std::cout << " (" << r.detail << ")";
    std::cout << "\n";
  }
  return all ? kExitOk : kExitInvalid;
}

int cmd_matrix(const std::string& graph, int tau_bar, const std::string& kind, double gamma,
               std::uint64_t seed, long k, const std::string& out) {
  const Digraph g = load_edge_list(graph);
  DelaySpec spec;
  spec.kind = parse_delay_kind(kind);
  spec.tau_bar = tau_bar;
  spec.seed = seed;
  const DelaySchedule delays = make_schedule(spec, g);
  const Eigen::MatrixXd M = assemble_M(build_snapshot_matrices(g, snapshot_at(delays, k), gamma));
  emit(out, [&](std::ostream& os) { write_matrix_csv(os, M); });
  return kExitOk;
}

std::vector<double> default_gamma_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 30; ++i) grid.push_back(i / 100.0);
  return grid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Push-pull average consensus over delay-prone digraphs"};
  app.require_subcommand(1);

  ScenarioFlags run_flags, mc_flags, check_flags;
  auto* run = app.add_subcommand("run", "Single scenario, writes the trajectory CSV");
  run_flags.attach(run, false);
  auto* mc = app.add_subcommand("mc", "Monte Carlo mean consensus-error curve");
  mc_flags.attach(mc, true);
  auto* chk = app.add_subcommand("check", "Run the invariant suite on a graph and delay seed");
  check_flags.attach(chk, false);

  std::string info_graph;
  auto* info = app.add_subcommand("graph-info", "Degrees, strong connectivity, min push weight");
  info->add_option("graph_file", info_graph, "Edge-list file")->required();

  auto* spectral = app.add_subcommand("spectral", "Spectral-gap sweeps of M(k)");
  spectral->require_subcommand(1);
  std::string sweep_graph, sweep_out;
  int sweep_tau = 0, samples = 100;
  std::uint64_t sweep_seed = 0;
  double sweep_gamma_value = 0.1;
  std::vector<double> gamma_grid;
  std::vector<int> tau_grid;

  auto* gsweep = spectral->add_subcommand("gamma-sweep", "Mean gap as a function of gamma");
  gsweep->add_option("graph_file,--graph", sweep_graph, "Edge-list file")->required();
  gsweep->add_option("--tau-bar", sweep_tau, "Maximum link delay");
  gsweep->add_option("--gammas", gamma_grid, "Gamma grid (default 0.01..0.30)");
  gsweep->add_option("--samples", samples, "Random snapshots per point");
  gsweep->add_option("--seed", sweep_seed, "Snapshot seed");
  gsweep->add_option("--out", sweep_out, "Output CSV path");

  auto* dsweep = spectral->add_subcommand("delay-sweep", "Mean gap as a function of tau_bar");
  dsweep->add_option("graph_file,--graph", sweep_graph, "Edge-list file")->required();
  dsweep->add_option("--gamma", sweep_gamma_value, "Surplus gain");
  dsweep->add_option("--tau-bars", tau_grid, "Delay bounds (default 0..10)");
  dsweep->add_option("--samples", samples, "Random snapshots per point");
  dsweep->add_option("--seed", sweep_seed, "Snapshot seed");
  dsweep->add_option("--out", sweep_out, "Output CSV path");

  std::string mat_graph, mat_kind = "uniform", mat_out;
  int mat_tau = 0;
  double mat_gamma = 0.1;
  std::uint64_t mat_seed = 0;
  long mat_k = 0;
  auto* mat = app.add_subcommand("matrix", "Dump M(k) realised by a delay schedule");
  mat->add_option("graph_file,--graph", mat_graph, "Edge-list file")->required();
  mat->add_option("--tau-bar", mat_tau, "Maximum link delay");
  mat->add_option("--delay-kind", mat_kind, "zero | constant | uniform");
  mat->add_option("--gamma", mat_gamma, "Surplus gain");
  mat->add_option("--seed", mat_seed, "Delay seed");
  mat->add_option("--k", mat_k, "Time step");
  mat->add_option("--out", mat_out, "Output CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    if (*run) return cmd_run(run_flags);
    if (*mc) return cmd_mc(mc_flags);
    if (*chk) return cmd_check(check_flags);
    if (*info) return cmd_graph_info(info_graph);
    if (*mat) return cmd_matrix(mat_graph, mat_tau, mat_kind, mat_gamma, mat_seed, mat_k, mat_out);
    if (*gsweep) {
      const Digraph g = load_edge_list(sweep_graph);
      if (gamma_grid.empty()) gamma_grid = default_gamma_grid();
      const auto table = sweep_gamma(g, sweep_tau, gamma_grid, samples, sweep_seed);
      emit(sweep_out, [&](std::ostream& os) { write_sweep_csv(os, "gamma", table); });
      return kExitOk;
    }
    if (*dsweep) {
      const Digraph g = load_edge_list(sweep_graph);
      if (tau_grid.empty()) {
        tau_grid.resize(11);
        std::iota(tau_grid.begin(), tau_grid.end(), 0);
      }
      const auto table = mean_gap_vs_delay(g, sweep_gamma_value, tau_grid, samples, sweep_seed);
      emit(sweep_out, [&](std::ostream& os) { write_sweep_csv(os, "tau_bar", table); });
      return kExitOk;
    }
  } catch (const io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitInvalid;
}

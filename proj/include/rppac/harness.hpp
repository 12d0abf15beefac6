#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <future>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rppac/augmented.hpp"
#include "rppac/delay.hpp"
#include "rppac/digraph.hpp"
#include "rppac/protocol.hpp"

namespace rppac {

class config_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct InitSpec {
  enum class Mode { index, constant, explicit_list, uniform_random };
  Mode mode = Mode::index;
  double value = 0.0;
  std::vector<double> values;
};

/// "index", "const:<v>", "file:<path>" or "random".
inline InitSpec parse_init(const std::string& text) {
  InitSpec spec;
  if (text == "index") return spec;
  if (text == "random") {
    spec.mode = InitSpec::Mode::uniform_random;
    return spec;
  }
  if (text.rfind("const:", 0) == 0) {
    spec.mode = InitSpec::Mode::constant;
    try {
      spec.value = std::stod(text.substr(6));
    } catch (const std::exception&) {
      throw config_error("bad constant in --init '" + text + "'");
    }
    return spec;
  }
  if (text.rfind("file:", 0) == 0) {
    const std::string path = text.substr(5);
    std::ifstream in(path);
    if (!in) throw io_error("cannot open initial-value file '" + path + "'");
    spec.mode = InitSpec::Mode::explicit_list;
    std::string tok;
    while (in >> tok) {
      if (tok[0] == '#') {
        std::getline(in, tok);
        continue;
      }
      try {
        spec.values.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw config_error("bad value '" + tok + "' in " + path);
      }
    }
    return spec;
  }
  throw config_error("unknown --init mode '" + text + "'");
}

/// Random mode draws x_j(0) uniformly from [0, n).
inline Eigen::VectorXd make_initial_state(const InitSpec& init, int n, std::uint64_t seed) {
  Eigen::VectorXd x(n);
  switch (init.mode) {
    case InitSpec::Mode::index:
      for (int j = 0; j < n; ++j) x[j] = j + 1.0;
      break;
    case InitSpec::Mode::constant:
      x.setConstant(init.value);
      break;
    case InitSpec::Mode::explicit_list:
      if (static_cast<int>(init.values.size()) != n) {
        throw config_error("initial-value list has " + std::to_string(init.values.size()) +
                           " entries, graph has " + std::to_string(n) + " nodes");
      }
      for (int j = 0; j < n; ++j) x[j] = init.values[j];
      break;
    case InitSpec::Mode::uniform_random: {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> u(0.0, static_cast<double>(n));
      for (int j = 0; j < n; ++j) x[j] = u(rng);
      break;
    }
  }
  return x;
}

struct ScenarioConfig {
  std::string graph_path;
  DelayKind delay_kind = DelayKind::uniform_iid;
  int tau_bar = 0;
  std::uint64_t seed = 0;
  std::string trace_path;
  double gamma = 0.1;
  InitSpec init;
  long iters = 300;
  int runs = 100;
  std::string out_path;
  bool force_gamma = false;
};

inline DelayKind parse_delay_kind(const std::string& s) {
  if (s == "zero") return DelayKind::zero;
  if (s == "constant") return DelayKind::constant;
  if (s == "uniform") return DelayKind::uniform_iid;
  if (s == "trace") return DelayKind::trace;
  throw config_error("unknown delay kind '" + s + "'");
}

/// Applies one key=value setting. Keys mirror the long CLI flag names.
inline void apply_setting(ScenarioConfig& cfg, const std::string& key, const std::string& value) {
  auto as_long = [&](const std::string& v) {
    try {
      std::size_t used = 0;
      long out = std::stol(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return out;
    } catch (const std::exception&) {
      throw config_error("bad integer for '" + key + "': " + v);
    }
  };
  if (key == "graph") {
    cfg.graph_path = value;
  } else if (key == "tau-bar") {
    cfg.tau_bar = static_cast<int>(as_long(value));
  } else if (key == "delay-kind") {
    cfg.delay_kind = parse_delay_kind(value);
  } else if (key == "trace") {
    cfg.trace_path = value;
  } else if (key == "gamma") {
    try {
      cfg.gamma = std::stod(value);
    } catch (const std::exception&) {
      throw config_error("bad gamma: " + value);
    }
  } else if (key == "iters") {
    cfg.iters = as_long(value);
  } else if (key == "runs") {
    cfg.runs = static_cast<int>(as_long(value));
  } else if (key == "seed") {
    cfg.seed = static_cast<std::uint64_t>(as_long(value));
  } else if (key == "init") {
    cfg.init = parse_init(value);
  } else if (key == "out") {
    cfg.out_path = value;
  } else if (key == "force-gamma") {
    cfg.force_gamma = (value == "true" || value == "1");
  } else {
    throw config_error("unknown config key '" + key + "'");
  }
}

inline void parse_config(std::istream& in, ScenarioConfig& cfg) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw config_error("config line " + std::to_string(lineno) + ": expected key=value");
    }
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
      return s;
    };
    apply_setting(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

inline void validate(const ScenarioConfig& cfg) {
  if (cfg.iters < 0) throw config_error("iters must be >= 0");
  if (cfg.runs < 1) throw config_error("runs must be >= 1");
  if (cfg.tau_bar < 0) throw config_error("tau-bar must be >= 0");
  if (cfg.delay_kind == DelayKind::trace && cfg.trace_path.empty()) {
    throw config_error("delay kind 'trace' needs --trace <file>");
  }
}

/// Run `run_index` of a scenario uses seed + run_index for both the delay
/// draws and (in random mode) the initial values.
inline DelaySchedule scenario_schedule(const ScenarioConfig& cfg, const Digraph& g, int run_index = 0) {
  DelaySpec spec;
  spec.kind = cfg.delay_kind;
  spec.tau_bar = cfg.tau_bar;
  spec.seed = cfg.seed + static_cast<std::uint64_t>(run_index);
  if (cfg.delay_kind == DelayKind::trace) spec.trace = load_trace(cfg.trace_path);
  return make_schedule(std::move(spec), g);
}

inline Trajectory run_single(const ScenarioConfig& cfg, const Digraph& g, int run_index) {
  const DelaySchedule delays = scenario_schedule(cfg, g, run_index);
  const Eigen::VectorXd x0 =
      make_initial_state(cfg.init, g.size(), cfg.seed + static_cast<std::uint64_t>(run_index));
  return run_rppac(g, delays, cfg.gamma, x0, cfg.iters,
                   cfg.force_gamma ? GammaCheck::unchecked : GammaCheck::enforce_bound);
}

/// Single run plus its consensus-error curve (`trajectory.error`).
inline Trajectory run_scenario(const ScenarioConfig& cfg, const Digraph& g) {
  validate(cfg);
  return run_single(cfg, g, 0);
}

inline Trajectory run_scenario(const ScenarioConfig& cfg) {
  return run_scenario(cfg, load_edge_list(cfg.graph_path));
}

/// All Monte Carlo runs, in run-index order. Runs execute on worker threads.
inline std::vector<Trajectory> simulate_runs(const ScenarioConfig& cfg, const Digraph& g) {
  validate(cfg);
  validate_gamma(cfg.gamma, min_push_weight(build_push_weights(g)),
                 cfg.force_gamma ? GammaCheck::unchecked : GammaCheck::enforce_bound);
  std::vector<Trajectory> out(static_cast<std::size_t>(cfg.runs));
  const int workers = std::clamp(static_cast<int>(std::thread::hardware_concurrency()), 1, cfg.runs);
  std::vector<std::future<void>> tasks;
  for (int w = 0; w < workers; ++w) {
    tasks.push_back(std::async(std::launch::async, [&, w] {
      for (int r = w; r < cfg.runs; r += workers) out[static_cast<std::size_t>(r)] = run_single(cfg, g, r);
    }));
  }
  for (auto& t : tasks) t.get();
  return out;
}

/// Per-iteration mean of the runs' error curves, summed in run order.
inline std::vector<double> mean_error_curve(const std::vector<Trajectory>& runs) {
  if (runs.empty()) return {};
  std::vector<double> mean(runs.front().error.size(), 0.0);
  for (const auto& t : runs)
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += t.error.at(k);
  for (double& v : mean) v /= static_cast<double>(runs.size());
  return mean;
}

inline std::vector<double> monte_carlo(const ScenarioConfig& cfg, const Digraph& g) {
  return mean_error_curve(simulate_runs(cfg, g));
}

// ---------------------------------------------------------------------------
// CSV

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buf, end);
}

inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const Eigen::Index n = traj.x.empty() ? 0 : traj.x.front().size();
  out << "k";
  for (Eigen::Index j = 1; j <= n; ++j) out << ",x_" << j;
  for (Eigen::Index j = 1; j <= n; ++j) out << ",s_" << j;
  out << ",error\n";
  for (std::size_t k = 0; k < traj.x.size(); ++k) {
    out << k;
    for (Eigen::Index j = 0; j < n; ++j) out << ',' << format_double(traj.x[k][j]);
    for (Eigen::Index j = 0; j < n; ++j) out << ',' << format_double(traj.s[k][j]);
    out << ',' << format_double(traj.error[k]) << '\n';
  }
}

inline void write_curve_csv(std::ostream& out, const std::vector<double>& curve) {
  out << "k,mean_error\n";
  for (std::size_t k = 0; k < curve.size(); ++k) out << k << ',' << format_double(curve[k]) << '\n';
}

template <typename Key>
void write_sweep_csv(std::ostream& out, const std::string& key_name,
                     const std::vector<std::pair<Key, double>>& table) {
  out << key_name << ",mean_gap\n";
  for (const auto& [key, gap] : table) {
    if constexpr (std::is_floating_point_v<Key>) {
      out << format_double(key);
    } else {
      out << key;
    }
    out << ',' << format_double(gap) << '\n';
  }
}

/// Row-major dump of a matrix, no header.
inline void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& A) {
  for (Eigen::Index r = 0; r < A.rows(); ++r) {
    for (Eigen::Index c = 0; c < A.cols(); ++c) {
      if (c) out << ',';
      out << format_double(A(r, c));
    }
    out << '\n';
  }
}

/// Writes through `writer` to `path`, throwing io_error on failure.
template <typename Writer>
void export_csv(const std::string& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  writer(out);
  out.flush();
  if (!out) throw io_error("write to '" + path + "' failed");
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

inline CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) return t;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.header.push_back(cell);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      double v = 0.0;
      auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || p != cell.data() + cell.size()) {
        throw std::runtime_error("bad CSV number '" + cell + "'");
      }
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace rppac

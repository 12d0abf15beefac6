#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rppac/augmented.hpp"
#include "rppac/delay.hpp"
#include "rppac/digraph.hpp"
#include "rppac/harness.hpp"
#include "rppac/protocol.hpp"

namespace rppac {

inline double row_sum_error(const Eigen::MatrixXd& A) {
  return (A.rowwise().sum().array() - 1.0).abs().maxCoeff();
}

inline double col_sum_error(const Eigen::MatrixXd& A) {
  return (A.colwise().sum().array() - 1.0).abs().maxCoeff();
}

/// max_k |1'x(k) + 1's(k) + in-flight surplus - 1'x(0)|
inline double conservation_drift(const Trajectory& t) {
  if (t.x.empty()) return 0.0;
  const double total = t.x.front().sum();
  double worst = 0.0;
  for (std::size_t k = 0; k < t.x.size(); ++k) {
    worst = std::max(worst, std::abs(t.x[k].sum() + t.s[k].sum() + t.inflight_surplus[k] - total));
  }
  return worst;
}

struct TrajectoryDiff {
  double x = 0.0;
  double s = 0.0;
};

/// Largest entrywise gap over all k. Trajectories of different length
/// compare as +inf.
inline TrajectoryDiff max_difference(const Trajectory& a, const Trajectory& b) {
  TrajectoryDiff d;
  if (a.x.size() != b.x.size()) {
    d.x = d.s = std::numeric_limits<double>::infinity();
    return d;
  }
  for (std::size_t k = 0; k < a.x.size(); ++k) {
    d.x = std::max(d.x, (a.x[k] - b.x[k]).cwiseAbs().maxCoeff());
    d.s = std::max(d.s, (a.s[k] - b.s[k]).cwiseAbs().maxCoeff());
  }
  return d;
}

/// Every edge has a nonzero push entry in exactly one delay layer.
inline bool single_push_layer_per_edge(const Digraph& g, const SystemMatrices& sm) {
  for (const Edge& e : g.edges()) {
    int layers = 0;
    for (int d = 0; d <= sm.tau_bar; ++d)
      if (sm.C_tilde(d * sm.n + e.receiver, e.sender) != 0.0) ++layers;
    if (layers != 1) return false;
  }
  return true;
}

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Structural and numerical invariants of one scenario: weight stochasticity,
/// mass conservation in both simulators, node-level vs matrix-form agreement,
/// augmented stochasticity at every step, and M1^2 = 0.
inline std::vector<CheckResult> run_invariant_suite(const Digraph& g, const DelaySchedule& delays,
                                                    double gamma, const Eigen::VectorXd& x0, long K,
                                                    GammaCheck check = GammaCheck::enforce_bound) {
  std::vector<CheckResult> out;
  auto add = [&](std::string name, bool ok, double value) {
    out.push_back({std::move(name), ok, format_double(value)});
  };

  const Eigen::MatrixXd R = build_pull_weights(g);
  const Eigen::MatrixXd C = build_push_weights(g);
  add("pull_rows_sum_to_one", row_sum_error(R) <= 1e-12, row_sum_error(R));
  add("push_cols_sum_to_one", col_sum_error(C) <= 1e-12, col_sum_error(C));
  const double min_diag = std::min(R.diagonal().minCoeff(), C.diagonal().minCoeff());
  add("positive_self_weights", min_diag > 0.0, min_diag);

  const Trajectory node = run_rppac(g, delays, gamma, x0, K, check);
  const Trajectory matrix = run_matrix_form(g, delays, gamma, x0, K, check);
  add("node_mass_conservation", conservation_drift(node) < 1e-9, conservation_drift(node));
  add("matrix_mass_conservation", conservation_drift(matrix) < 1e-9, conservation_drift(matrix));

  const TrajectoryDiff diff = max_difference(node, matrix);
  add("node_vs_matrix_x", diff.x < 1e-10, diff.x);
  add("node_vs_matrix_s", diff.s < 1e-10, diff.s);

  double stoch = 0.0;
  bool layers_ok = true;
  double m1_sq = 0.0;
  for (long k = 0; k < std::max<long>(K, 1); ++k) {
    const SystemMatrices sm = build_snapshot_matrices(g, snapshot_at(delays, k), gamma);
    stoch = std::max({stoch, row_sum_error(sm.R_tilde), col_sum_error(sm.C_tilde)});
    layers_ok = layers_ok && single_push_layer_per_edge(g, sm);
    const Eigen::MatrixXd M1 = split_M0_M1(sm).M1;
    m1_sq = std::max(m1_sq, (M1 * M1).cwiseAbs().maxCoeff());
  }
  add("augmented_stochasticity", stoch <= 1e-12, stoch);
  out.push_back({"single_push_layer_per_edge", layers_ok, ""});
  add("M1_squared_zero", m1_sq == 0.0, m1_sq);
  return out;
}

}  // namespace rppac

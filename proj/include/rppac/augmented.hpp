#pragma once

#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rppac/delay.hpp"
#include "rppac/digraph.hpp"
#include "rppac/protocol.hpp"

namespace rppac {

class snapshot_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Which (edge, delay) pairs deliver at one step k, and which delay each
/// edge's transmission at k will take. Both grids are indexed by
/// edge id * (tau_bar + 1) + delay.
struct ArrivalSnapshot {
  int tau_bar = 0;
  std::vector<char> arrived;
  std::vector<char> sent;

  ArrivalSnapshot() = default;
  ArrivalSnapshot(std::size_t edge_count, int max_delay)
      : tau_bar(max_delay),
        arrived(edge_count * static_cast<std::size_t>(max_delay + 1), 0),
        sent(edge_count * static_cast<std::size_t>(max_delay + 1), 0) {}

  std::size_t slot(int edge, int delay) const {
    return static_cast<std::size_t>(edge) * static_cast<std::size_t>(tau_bar + 1) +
           static_cast<std::size_t>(delay);
  }
  bool arrives(int edge, int delay) const { return arrived[slot(edge, delay)] != 0; }
  bool sends_with(int edge, int delay) const { return sent[slot(edge, delay)] != 0; }
  void set_arrival(int edge, int delay, bool v = true) { arrived[slot(edge, delay)] = v; }
  void set_send_delay(int edge, int delay, bool v = true) { sent[slot(edge, delay)] = v; }
};

/// Snapshot realised by a schedule at step k, using the schedule's global
/// maximum delay as the buffer depth.
inline ArrivalSnapshot snapshot_at(const DelaySchedule& delays, long k) {
  const Digraph& g = delays.graph();
  const int tau = delays.max_delay();
  ArrivalSnapshot snap(g.edge_count(), tau);
  const auto& edges = g.edges();
  for (std::size_t id = 0; id < edges.size(); ++id) {
    const Edge& e = edges[id];
    const int e_id = static_cast<int>(id);
    const int bound = delays.link_bound(e.receiver, e.sender);
    for (int d = 0; d <= bound; ++d) {
      if (k - d >= 0 && delays.delay_of(e.receiver, e.sender, k - d) == d) snap.set_arrival(e_id, d);
    }
    snap.set_send_delay(e_id, delays.delay_of(e.receiver, e.sender, k));
  }
  return snap;
}

/// Free-standing snapshot: each edge's send delay is uniform on {0..tau_bar}
/// and each arrival flag is set with probability 1 / (tau_bar + 1).
inline ArrivalSnapshot random_snapshot(const Digraph& g, int tau_bar, std::mt19937_64& rng) {
  if (tau_bar < 0) throw snapshot_error("tau_bar must be >= 0");
  ArrivalSnapshot snap(g.edge_count(), tau_bar);
  std::uniform_int_distribution<int> pick_delay(0, tau_bar);
  std::bernoulli_distribution arrives(1.0 / (tau_bar + 1.0));
  for (int id = 0; id < static_cast<int>(g.edge_count()); ++id) {
    for (int d = 0; d <= tau_bar; ++d) snap.set_arrival(id, d, arrives(rng));
    snap.set_send_delay(id, pick_delay(rng));
  }
  return snap;
}

/// Blocks of the augmented system. Dimension of each block is
/// n * (tau_bar + 1); the actual nodes occupy the first n coordinates.
struct SystemMatrices {
  int n = 0;
  int tau_bar = 0;
  double gamma = 0.0;
  Eigen::MatrixXd R_tilde;
  Eigen::MatrixXd H;
  Eigen::MatrixXd J;
  Eigen::MatrixXd C_tilde;

  Eigen::Index augmented_size() const { return static_cast<Eigen::Index>(n) * (tau_bar + 1); }

  Eigen::MatrixXd pull_layer(int delay) const { return R_tilde.block(0, delay * n, n, n); }
  Eigen::MatrixXd push_layer(int delay) const { return C_tilde.block(delay * n, 0, n, n); }
};

inline SystemMatrices build_snapshot_matrices(const Digraph& g, const ArrivalSnapshot& snap,
                                              double gamma) {
  const int n = g.size();
  const int tau = snap.tau_bar;
  const std::size_t expected = g.edge_count() * static_cast<std::size_t>(tau + 1);
  if (snap.arrived.size() != expected || snap.sent.size() != expected) {
    throw snapshot_error("snapshot does not cover every edge and delay of the graph");
  }

  const auto& edges = g.edges();
  std::vector<int> arrivals(n, 0);
  for (std::size_t id = 0; id < edges.size(); ++id) {
    int sends = 0;
    for (int d = 0; d <= tau; ++d) {
      if (snap.arrives(static_cast<int>(id), d)) ++arrivals[edges[id].receiver];
      if (snap.sends_with(static_cast<int>(id), d)) ++sends;
    }
    if (sends != 1) {
      throw snapshot_error("edge " + std::to_string(edges[id].sender + 1) + " -> " +
                           std::to_string(edges[id].receiver + 1) + " has " +
                           std::to_string(sends) + " send delays at one step");
    }
  }

  SystemMatrices sm;
  sm.n = n;
  sm.tau_bar = tau;
  sm.gamma = gamma;
  const Eigen::Index N = sm.augmented_size();
  sm.R_tilde = Eigen::MatrixXd::Zero(N, N);
  sm.C_tilde = Eigen::MatrixXd::Zero(N, N);
  sm.H = Eigen::MatrixXd::Zero(N, N);
  sm.J = Eigen::MatrixXd::Zero(N, N);

  const Eigen::MatrixXd C = build_push_weights(g);
  for (NodeId j = 0; j < n; ++j) {
    sm.R_tilde(j, j) = 1.0 / (1.0 + arrivals[j]);
    sm.C_tilde(j, j) = C(j, j);
    sm.H(j, j) = gamma;
  }
  for (std::size_t id = 0; id < edges.size(); ++id) {
    const auto [j, i] = edges[id];
    const double r = 1.0 / (1.0 + arrivals[j]);
    for (int d = 0; d <= tau; ++d) {
      if (snap.arrives(static_cast<int>(id), d)) sm.R_tilde(j, d * n + i) = r;
      if (snap.sends_with(static_cast<int>(id), d)) sm.C_tilde(d * n + j, i) = C(j, i);
    }
  }
  // Buffers: x^(d)(k+1) = x^(d-1)(k) and s^(d)(k+1) gains s^(d+1)(k).
  for (int d = 1; d <= tau; ++d) {
    sm.R_tilde.block(d * n, (d - 1) * n, n, n).setIdentity();
    sm.C_tilde.block((d - 1) * n, d * n, n, n).setIdentity();
  }

  sm.J.topRows(n) = -sm.R_tilde.topRows(n);
  sm.J.topLeftCorner(n, n) += Eigen::MatrixXd::Identity(n, n);
  return sm;
}

/// [[R~, H], [J, C~ - H]]
inline Eigen::MatrixXd assemble_M(const SystemMatrices& sm) {
  const Eigen::Index N = sm.augmented_size();
  for (const Eigen::MatrixXd* b : {&sm.R_tilde, &sm.H, &sm.J, &sm.C_tilde}) {
    if (b->rows() != N || b->cols() != N) {
      throw std::invalid_argument("system block is " + std::to_string(b->rows()) + "x" +
                                  std::to_string(b->cols()) + ", expected " + std::to_string(N) +
                                  "x" + std::to_string(N));
    }
  }
  Eigen::MatrixXd M(2 * N, 2 * N);
  M << sm.R_tilde, sm.H, sm.J, sm.C_tilde - sm.H;
  return M;
}

struct SplitM {
  Eigen::MatrixXd M0;
  Eigen::MatrixXd M1;
};

/// M = M0 + M1 with M0 = [[R~, 0], [J, C~ - H]] and M1 = [[0, H], [0, 0]].
inline SplitM split_M0_M1(const SystemMatrices& sm) {
  const Eigen::Index N = sm.augmented_size();
  SplitM out;
  out.M0 = assemble_M(sm);
  out.M0.topRightCorner(N, N).setZero();
  out.M1 = Eigen::MatrixXd::Zero(2 * N, 2 * N);
  out.M1.topRightCorner(N, N) = sm.H;
  return out;
}

/// Iterates the augmented linear system. Buffers start at x(0) and s~ at 0.
inline Trajectory run_matrix_form(const Digraph& g, const DelaySchedule& delays, double gamma,
                                  const Eigen::VectorXd& x0, long K,
                                  GammaCheck check = GammaCheck::enforce_bound) {
  detail::check_initial(g, x0);
  if (K < 0) throw std::invalid_argument("iteration count must be >= 0");
  validate_gamma(gamma, min_push_weight(build_push_weights(g)), check);

  const int n = g.size();
  const int tau = delays.max_delay();
  const Eigen::Index N = static_cast<Eigen::Index>(n) * (tau + 1);

  Eigen::VectorXd z = Eigen::VectorXd::Zero(2 * N);
  for (int d = 0; d <= tau; ++d) z.segment(d * n, n) = x0;

  Trajectory traj;
  traj.average = x0.mean();
  auto record = [&] {
    const double buffered = z.segment(N + n, N - n).sum();
    detail::record(traj, z.head(n), z.segment(N, n), buffered);
  };
  record();
  for (long k = 0; k < K; ++k) {
    const SystemMatrices sm = build_snapshot_matrices(g, snapshot_at(delays, k), gamma);
    z = assemble_M(sm) * z;
    record();
  }
  return traj;
}

struct WordProducts {
  Eigen::MatrixXd R_bar;  ///< R~(k+beta) ... R~(k+1)
  Eigen::MatrixXd E_bar;  ///< (C~(k+beta) - H) ... (C~(k+1) - H)
};

/// Backward products over an explicit sequence; `window[0]` is applied first.
inline WordProducts word_products(const std::vector<SystemMatrices>& window) {
  if (window.empty()) throw std::invalid_argument("word length must be >= 1");
  const Eigen::Index N = window.front().augmented_size();
  WordProducts w{Eigen::MatrixXd::Identity(N, N), Eigen::MatrixXd::Identity(N, N)};
  for (const auto& sm : window) {
    if (sm.augmented_size() != N) throw std::invalid_argument("word mixes system sizes");
    w.R_bar = sm.R_tilde * w.R_bar;
    w.E_bar = (sm.C_tilde - sm.H) * w.E_bar;
  }
  return w;
}

/// Products over the schedule's snapshots at k_start+1 .. k_start+beta.
inline WordProducts word_products(const Digraph& g, const DelaySchedule& delays, double gamma,
                                  long k_start, int beta) {
  if (beta < 1) throw std::invalid_argument("word length must be >= 1");
  std::vector<SystemMatrices> window;
  window.reserve(static_cast<std::size_t>(beta));
  for (long t = k_start + 1; t <= k_start + beta; ++t)
    window.push_back(build_snapshot_matrices(g, snapshot_at(delays, t), gamma));
  return word_products(window);
}

}  // namespace rppac

#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rppac/delay.hpp"
#include "rppac/digraph.hpp"

namespace rppac {

struct NodeState {
  double x = 0.0;
  double s = 0.0;
};

/// One transmission on a link. The state travels unweighted; the surplus
/// travels already scaled by the sender's push weight.
struct Message {
  NodeId sender;
  NodeId receiver;
  long send_time;
  double x_payload;
  double surplus_payload;
};

/// Messages in transit, bucketed by the step at which they are delivered.
class InFlightQueue {
 public:
  void push(long arrival_time, Message m) { by_arrival_[arrival_time].push_back(m); }

  /// Removes and returns everything due at step k.
  std::vector<Message> take_due(long k) {
    auto it = by_arrival_.find(k);
    if (it == by_arrival_.end()) return {};
    std::vector<Message> due = std::move(it->second);
    by_arrival_.erase(it);
    return due;
  }

  double surplus_total() const {
    double total = 0.0;
    for (const auto& [t, msgs] : by_arrival_)
      for (const auto& m : msgs) total += m.surplus_payload;
    return total;
  }

  std::size_t size() const {
    std::size_t count = 0;
    for (const auto& [t, msgs] : by_arrival_) count += msgs.size();
    return count;
  }

 private:
  std::map<long, std::vector<Message>> by_arrival_;
};

struct NetworkState {
  std::vector<NodeState> nodes;
  InFlightQueue inflight;
};

/// Per-iteration record. Index 0 holds the initial values.
struct Trajectory {
  std::vector<Eigen::VectorXd> x;
  std::vector<Eigen::VectorXd> s;
  std::vector<double> inflight_surplus;
  std::vector<double> error;
  double average = 0.0;

  std::size_t steps() const { return x.empty() ? 0 : x.size() - 1; }
};

/// Mean squared deviation from the target average.
inline double consensus_error(const Eigen::VectorXd& x, double xbar) {
  return (x.array() - xbar).square().sum() / static_cast<double>(x.size());
}

enum class GammaCheck { enforce_bound, unchecked };

class gamma_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Rejects gamma outside (0, upper) unless the caller opts out.
inline void validate_gamma(double gamma, double upper, GammaCheck check = GammaCheck::enforce_bound) {
  if (!std::isfinite(gamma)) throw gamma_error("gamma must be finite");
  if (check == GammaCheck::unchecked) return;
  if (!(gamma > 0.0 && gamma < upper)) {
    throw gamma_error("gamma=" + std::to_string(gamma) + " outside (0, " + std::to_string(upper) +
                      "); pass --force-gamma to override");
  }
}

inline NetworkState initial_network_state(const Eigen::VectorXd& x0) {
  NetworkState st;
  st.nodes.resize(static_cast<std::size_t>(x0.size()));
  for (Eigen::Index j = 0; j < x0.size(); ++j) st.nodes[j] = {x0[j], 0.0};
  return st;
}

/// One synchronous round: broadcast current values, deliver what is due at k,
/// then update every node.
inline NetworkState step(NetworkState state, const Digraph& g, const DelaySchedule& delays,
                         const Eigen::MatrixXd& C, double gamma, long k) {
  const int n = g.size();

  for (NodeId j = 0; j < n; ++j) {
    const NodeState& me = state.nodes[j];
    for (NodeId l : g.out_neighbors(j)) {
      const int d = delays.delay_of(l, j, k);
      state.inflight.push(k + d, Message{j, l, k, me.x, C(l, j) * me.s});
    }
  }

  std::vector<std::vector<Message>> inbox(n);
  for (Message& m : state.inflight.take_due(k)) inbox[m.receiver].push_back(m);

  std::vector<NodeState> next(n);
  for (NodeId j = 0; j < n; ++j) {
    const NodeState& me = state.nodes[j];
    const double r = 1.0 / (1.0 + static_cast<double>(inbox[j].size()));
    double x_sum = me.x;
    double surplus_in = C(j, j) * me.s;
    for (const Message& m : inbox[j]) {
      x_sum += m.x_payload;
      surplus_in += m.surplus_payload;
    }
    next[j].x = gamma * me.s + r * x_sum;
    next[j].s = me.x - next[j].x + surplus_in;
  }
  state.nodes = std::move(next);
  return state;
}

namespace detail {

inline Eigen::VectorXd gather_x(const std::vector<NodeState>& nodes) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t j = 0; j < nodes.size(); ++j) v[static_cast<Eigen::Index>(j)] = nodes[j].x;
  return v;
}

inline Eigen::VectorXd gather_s(const std::vector<NodeState>& nodes) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t j = 0; j < nodes.size(); ++j) v[static_cast<Eigen::Index>(j)] = nodes[j].s;
  return v;
}

inline void check_initial(const Digraph& g, const Eigen::VectorXd& x0) {
  if (x0.size() != g.size()) {
    throw std::invalid_argument("initial state has " + std::to_string(x0.size()) +
                                " entries, graph has " + std::to_string(g.size()) + " nodes");
  }
}

inline void record(Trajectory& traj, Eigen::VectorXd x, Eigen::VectorXd s, double inflight) {
  traj.error.push_back(consensus_error(x, traj.average));
  traj.x.push_back(std::move(x));
  traj.s.push_back(std::move(s));
  traj.inflight_surplus.push_back(inflight);
}

}  // namespace detail

/// Message-level RPPAC over K rounds.
inline Trajectory run_rppac(const Digraph& g, const DelaySchedule& delays, double gamma,
                            const Eigen::VectorXd& x0, long K,
                            GammaCheck check = GammaCheck::enforce_bound) {
  detail::check_initial(g, x0);
  if (K < 0) throw std::invalid_argument("iteration count must be >= 0");
  const Eigen::MatrixXd C = build_push_weights(g);
  validate_gamma(gamma, min_push_weight(C), check);

  Trajectory traj;
  traj.average = x0.mean();
  NetworkState state = initial_network_state(x0);
  detail::record(traj, x0, Eigen::VectorXd::Zero(g.size()), 0.0);
  for (long k = 0; k < K; ++k) {
    state = step(std::move(state), g, delays, C, gamma, k);
    detail::record(traj, detail::gather_x(state.nodes), detail::gather_s(state.nodes),
                   state.inflight.surplus_total());
  }
  return traj;
}

/// Delay-free push-pull iteration with the static pull and push matrices.
inline Trajectory run_ppac(const Digraph& g, double gamma, const Eigen::VectorXd& x0, long K,
                           GammaCheck check = GammaCheck::enforce_bound) {
  detail::check_initial(g, x0);
  if (K < 0) throw std::invalid_argument("iteration count must be >= 0");
  const Eigen::MatrixXd R = build_pull_weights(g);
  const Eigen::MatrixXd C = build_push_weights(g);
  validate_gamma(gamma, min_push_weight(C), check);

  Trajectory traj;
  traj.average = x0.mean();
  Eigen::VectorXd x = x0;
  Eigen::VectorXd s = Eigen::VectorXd::Zero(g.size());
  detail::record(traj, x, s, 0.0);
  for (long k = 0; k < K; ++k) {
    Eigen::VectorXd x_next = gamma * s + R * x;
    Eigen::VectorXd s_next = x - x_next + C * s;
    x = std::move(x_next);
    s = std::move(s_next);
    detail::record(traj, x, s, 0.0);
  }
  return traj;
}

}  // namespace rppac

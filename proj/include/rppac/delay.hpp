#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "rppac/digraph.hpp"

namespace rppac {

enum class DelayKind { zero, constant, uniform_iid, trace };

class delay_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Keys are 0-based (receiver, sender) pairs.
using LinkKey = std::pair<NodeId, NodeId>;
/// (receiver, sender, send time).
using TraceKey = std::tuple<NodeId, NodeId, long>;

struct DelaySpec {
  DelayKind kind = DelayKind::zero;
  int tau_bar = 0;
  std::map<LinkKey, int> per_link_bounds;
  std::uint64_t seed = 0;
  std::map<TraceKey, int> trace;
};

/// A message delivered to some node: who sent it, when, and how long it travelled.
struct Arrival {
  NodeId sender;
  long send_time;
  int delay;

  friend bool operator==(const Arrival&, const Arrival&) = default;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based draw: depends only on (seed, stream, counter), so queries can
// arrive in any order.
inline std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ stream);
  return splitmix64(h ^ counter);
}

// Uniform integer in [0, bound] via 128-bit multiply-shift.
inline int bounded(std::uint64_t h, int bound) {
  const auto range = static_cast<unsigned __int128>(bound) + 1;
  return static_cast<int>((static_cast<unsigned __int128>(h) * range) >> 64);
}

}  // namespace detail

/// Immutable, random-access delay process over the edges of one graph.
class DelaySchedule {
 public:
  DelaySchedule(DelaySpec spec, Digraph g) : spec_(std::move(spec)), graph_(std::move(g)) {
    if (spec_.tau_bar < 0) throw delay_error("tau_bar must be >= 0");
    bounds_.assign(graph_.edge_count(), spec_.tau_bar);
    for (const auto& [link, bound] : spec_.per_link_bounds) {
      int id = graph_.edge_id(link.first, link.second);
      if (id < 0) {
        throw delay_error("per-link bound given for non-edge " + std::to_string(link.second + 1) +
                          " -> " + std::to_string(link.first + 1));
      }
      if (bound < 0 || bound > spec_.tau_bar) {
        throw delay_error("per-link bound " + std::to_string(bound) + " outside [0, tau_bar=" +
                          std::to_string(spec_.tau_bar) + "]");
      }
      bounds_[id] = bound;
    }
    for (const auto& [key, d] : spec_.trace) {
      auto [r, s, k] = key;
      int id = graph_.edge_id(r, s);
      if (id < 0) throw delay_error("trace entry on non-edge");
      if (k < 0) throw delay_error("trace entry with negative send time");
      if (d < 0 || d > bounds_[id]) {
        throw delay_error("trace delay " + std::to_string(d) + " exceeds link bound " +
                          std::to_string(bounds_[id]));
      }
    }
  }

  const Digraph& graph() const { return graph_; }
  const DelaySpec& spec() const { return spec_; }
  int max_delay() const { return spec_.tau_bar; }

  /// Bound on link (receiver, sender); 0 for the self pair.
  int link_bound(NodeId receiver, NodeId sender) const {
    if (receiver == sender) return 0;
    return bounds_.at(require_edge(receiver, sender));
  }

  /// Delay experienced by the message sent on (receiver <- sender) at time k.
  int delay_of(NodeId receiver, NodeId sender, long k) const {
    if (receiver == sender && receiver >= 0 && receiver < graph_.size()) return 0;
    const int id = require_edge(receiver, sender);
    if (k < 0) throw delay_error("negative send time");
    const int bound = bounds_[id];
    switch (spec_.kind) {
      case DelayKind::zero:
        return 0;
      case DelayKind::constant:
        return bound;
      case DelayKind::uniform_iid:
        return detail::bounded(detail::counter_hash(spec_.seed, static_cast<std::uint64_t>(id),
                                                    static_cast<std::uint64_t>(k)),
                               bound);
      case DelayKind::trace: {
        auto it = spec_.trace.find({receiver, sender, k});
        if (it == spec_.trace.end()) {
          throw delay_error("trace has no delay for " + std::to_string(sender + 1) + " -> " +
                            std::to_string(receiver + 1) + " at k=" + std::to_string(k));
        }
        return it->second;
      }
    }
    return 0;
  }

  /// Non-self messages that reach node j exactly at step k, sorted by
  /// (sender, send time). Send times before 0 do not exist.
  std::vector<Arrival> arrivals_at(NodeId j, long k) const {
    std::vector<Arrival> out;
    if (k < 0) return out;
    for (NodeId i : graph_.in_neighbors(j)) {
      const int bound = link_bound(j, i);
      for (int d = bound; d >= 0; --d) {
        const long t = k - d;
        if (t < 0) continue;
        if (delay_of(j, i, t) == d) out.push_back({i, t, d});
      }
    }
    return out;
  }

 private:
  int require_edge(NodeId receiver, NodeId sender) const {
    int id = graph_.edge_id(receiver, sender);
    if (id < 0) {
      throw delay_error("unknown edge " + std::to_string(sender + 1) + " -> " +
                        std::to_string(receiver + 1));
    }
    return id;
  }

  DelaySpec spec_;
  Digraph graph_;
  std::vector<int> bounds_;
};

inline DelaySchedule make_schedule(DelaySpec spec, const Digraph& g) {
  return DelaySchedule(std::move(spec), g);
}

/// Trace lines: "<sender> <receiver> <k> <delay>", 1-based nodes, '#' comments.
inline std::map<TraceKey, int> parse_trace(std::istream& in) {
  std::map<TraceKey, int> trace;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    int sender = 0, receiver = 0, delay = 0;
    long k = 0;
    if (!(ls >> sender >> receiver >> k >> delay)) {
      throw delay_error("trace line " + std::to_string(lineno) +
                        ": expected '<sender> <receiver> <k> <delay>'");
    }
    if (!trace.emplace(TraceKey{receiver - 1, sender - 1, k}, delay).second) {
      throw delay_error("trace line " + std::to_string(lineno) + ": duplicate entry");
    }
  }
  return trace;
}

inline std::map<TraceKey, int> load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open trace file '" + path + "'");
  return parse_trace(in);
}

}  // namespace rppac

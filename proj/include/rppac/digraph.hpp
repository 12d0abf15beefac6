#pragma once

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace rppac {

using NodeId = int;

/// A directed link. `receiver` takes information from `sender`.
/// Node ids are 0-based inside the library.
struct Edge {
  NodeId receiver;
  NodeId sender;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

class graph_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fixed directed graph. Every node carries an implicit self-loop that is
/// never stored and never counted in degrees.
class Digraph {
 public:
  Digraph() = default;

  /// Build from 1-based (receiver, sender) labels.
  static Digraph from_edge_list(int n, const std::vector<std::pair<int, int>>& pairs) {
    if (n <= 0) throw graph_error("node count must be positive");
    Digraph g;
    g.n_ = n;
    g.edge_index_.assign(static_cast<std::size_t>(n) * n, -1);
    g.in_adj_.resize(n);
    g.out_adj_.resize(n);

    std::vector<Edge> edges;
    edges.reserve(pairs.size());
    for (const auto& [recv, send] : pairs) {
      if (recv < 1 || recv > n || send < 1 || send > n) {
        throw graph_error("edge (" + std::to_string(recv) + "," + std::to_string(send) +
                          ") has a node index outside [1," + std::to_string(n) + "]");
      }
      if (recv == send) {
        throw graph_error("explicit self-loop on node " + std::to_string(recv));
      }
      edges.push_back({recv - 1, send - 1});
    }
    std::sort(edges.begin(), edges.end());
    if (auto dup = std::adjacent_find(edges.begin(), edges.end()); dup != edges.end()) {
      throw graph_error("duplicate edge " + std::to_string(dup->sender + 1) + " -> " +
                        std::to_string(dup->receiver + 1));
    }

    g.edges_ = std::move(edges);
    for (std::size_t id = 0; id < g.edges_.size(); ++id) {
      const Edge& e = g.edges_[id];
      g.edge_index_[g.slot(e.receiver, e.sender)] = static_cast<int>(id);
      g.in_adj_[e.receiver].push_back(e.sender);
      g.out_adj_[e.sender].push_back(e.receiver);
    }
    for (auto& v : g.out_adj_) std::sort(v.begin(), v.end());
    return g;
  }

  int size() const { return n_; }
  std::size_t edge_count() const { return edges_.size(); }

  /// Edges sorted by (receiver, sender). Position in this list is the edge id.
  const std::vector<Edge>& edges() const { return edges_; }

  const std::vector<NodeId>& in_neighbors(NodeId j) const { return in_adj_.at(j); }
  const std::vector<NodeId>& out_neighbors(NodeId j) const { return out_adj_.at(j); }
  int in_degree(NodeId j) const { return static_cast<int>(in_adj_.at(j).size()); }
  int out_degree(NodeId j) const { return static_cast<int>(out_adj_.at(j).size()); }

  bool has_edge(NodeId receiver, NodeId sender) const { return edge_id(receiver, sender) >= 0; }

  /// Returns -1 when (receiver, sender) is not an edge.
  int edge_id(NodeId receiver, NodeId sender) const {
    if (receiver < 0 || receiver >= n_ || sender < 0 || sender >= n_) return -1;
    return edge_index_[slot(receiver, sender)];
  }

 private:
  std::size_t slot(NodeId r, NodeId s) const {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(s);
  }

  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<int> edge_index_;
  std::vector<std::vector<NodeId>> in_adj_;
  std::vector<std::vector<NodeId>> out_adj_;
};

/// Tarjan's algorithm, iterative. True iff the whole graph is one SCC.
inline bool is_strongly_connected(const Digraph& g) {
  const int n = g.size();
  if (n <= 1) return true;

  std::vector<int> index(n, -1), low(n, 0);
  std::vector<char> on_stack(n, 0);
  std::vector<NodeId> stack;
  int next_index = 0;
  int components = 0;

  struct Frame {
    NodeId v;
    std::size_t child;
  };
  std::vector<Frame> call;

  for (NodeId root = 0; root < n; ++root) {
    if (index[root] >= 0) continue;
    call.push_back({root, 0});
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = 1;

    while (!call.empty()) {
      Frame& f = call.back();
      const auto& succ = g.out_neighbors(f.v);
      if (f.child < succ.size()) {
        NodeId w = succ[f.child++];
        if (index[w] < 0) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
        continue;
      }
      NodeId v = f.v;
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
      if (low[v] == index[v]) {
        ++components;
        if (components > 1) return false;
        NodeId w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
        } while (w != v);
      }
    }
  }
  return components == 1;
}

/// Receiver-side weights: r_ji = 1 / (1 + in-degree(j)) on in-neighbors and self.
/// Row-stochastic.
inline Eigen::MatrixXd build_pull_weights(const Digraph& g) {
  const int n = g.size();
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(n, n);
  for (NodeId j = 0; j < n; ++j) {
    const double w = 1.0 / (1.0 + g.in_degree(j));
    R(j, j) = w;
    for (NodeId i : g.in_neighbors(j)) R(j, i) = w;
  }
  return R;
}

/// Sender-side weights: c_lj = 1 / (1 + out-degree(j)) on out-neighbors and self.
/// Column-stochastic.
inline Eigen::MatrixXd build_push_weights(const Digraph& g) {
  const int n = g.size();
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
  for (NodeId j = 0; j < n; ++j) {
    const double w = 1.0 / (1.0 + g.out_degree(j));
    C(j, j) = w;
    for (NodeId l : g.out_neighbors(j)) C(l, j) = w;
  }
  return C;
}

/// Smallest strictly positive push weight. Exclusive upper bound for the surplus gain.
inline double min_push_weight(const Eigen::MatrixXd& C) {
  double lo = std::numeric_limits<double>::infinity();
  for (Eigen::Index r = 0; r < C.rows(); ++r)
    for (Eigen::Index c = 0; c < C.cols(); ++c)
      if (C(r, c) > 0.0) lo = std::min(lo, C(r, c));
  return lo;
}

/// Parse the edge-list text format:
///
///   n=<count>
///   <sender> <receiver>     (1-based, one edge per line)
///
/// Blank lines and lines starting with '#' are skipped.
inline Digraph parse_edge_list(std::istream& in) {
  std::string line;
  int n = -1;
  int lineno = 0;
  std::vector<std::pair<int, int>> pairs;
  while (std::getline(in, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    line = line.substr(first);
    if (n < 0) {
      if (line.rfind("n=", 0) != 0) {
        throw graph_error("line " + std::to_string(lineno) + ": expected header 'n=<count>'");
      }
      try {
        std::size_t used = 0;
        n = std::stoi(line.substr(2), &used);
      } catch (const std::exception&) {
        throw graph_error("line " + std::to_string(lineno) + ": bad node count");
      }
      continue;
    }
    std::istringstream ls(line);
    int sender = 0, receiver = 0;
    std::string rest;
    if (!(ls >> sender >> receiver) || (ls >> rest && rest[0] != '#')) {
      throw graph_error("line " + std::to_string(lineno) + ": expected '<sender> <receiver>'");
    }
    pairs.emplace_back(receiver, sender);
  }
  if (n < 0) throw graph_error("missing header 'n=<count>'");
  return Digraph::from_edge_list(n, pairs);
}

class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline Digraph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open graph file '" + path + "'");
  return parse_edge_list(in);
}

}  // namespace rppac

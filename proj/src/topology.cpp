#include "topology.hpp"

#include <algorithm>
#include <queue>

namespace pdapa {

Topology build_topology(const std::vector<std::vector<bool>>& adjacency,
                        const std::vector<int>& cluster_of) {
  const int n = static_cast<int>(adjacency.size());
  if (n == 0) {
    throw TopologyError(TopologyErrorKind::not_square, "topology: empty adjacency");
  }
  for (const auto& row : adjacency) {
    if (static_cast<int>(row.size()) != n) {
      throw TopologyError(TopologyErrorKind::not_square,
                          "topology: adjacency matrix is not square");
    }
  }
  if (static_cast<int>(cluster_of.size()) != n) {
    throw TopologyError(TopologyErrorKind::bad_cluster_ids,
                        "topology: cluster assignment size differs from node count");
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (adjacency[i][j] != adjacency[j][i]) {
        throw TopologyError(TopologyErrorKind::non_symmetric,
                            "topology: adjacency is not symmetric at (" +
                                std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
      }
    }
  }

  Topology top;
  top.node_count = n;
  top.adjacency = adjacency;
  for (int i = 0; i < n; ++i) top.adjacency[i][i] = true;

  int max_cluster = -1;
  for (int c : cluster_of) max_cluster = std::max(max_cluster, c);
  if (max_cluster < 0) {
    throw TopologyError(TopologyErrorKind::bad_cluster_ids,
                        "topology: negative or missing cluster ids");
  }
  top.cluster_count = max_cluster + 1;
  top.cluster_of = cluster_of;
  std::vector<int> members(top.cluster_count, 0);
  for (int c : cluster_of) {
    if (c < 0) {
      throw TopologyError(TopologyErrorKind::bad_cluster_ids,
                          "topology: negative cluster id");
    }
    ++members[c];
  }
  for (int c = 0; c < top.cluster_count; ++c) {
    if (members[c] == 0) {
      throw TopologyError(TopologyErrorKind::empty_cluster,
                          "topology: cluster " + std::to_string(c + 1) + " has no nodes");
    }
  }

  // Connectivity over the whole graph (clusters themselves may be split).
  std::vector<bool> seen(n, false);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = true;
  int reached = 1;
  while (!frontier.empty()) {
    int v = frontier.front();
    frontier.pop();
    for (int u = 0; u < n; ++u) {
      if (u != v && top.adjacency[v][u] && !seen[u]) {
        seen[u] = true;
        ++reached;
        frontier.push(u);
      }
    }
  }
  if (reached != n) {
    throw TopologyError(TopologyErrorKind::disconnected,
                        "topology: graph is disconnected (" + std::to_string(reached) +
                            " of " + std::to_string(n) + " nodes reachable)");
  }

  top.neighbors.resize(n);
  top.cluster_neighbors.resize(n);
  top.foreign_neighbors.resize(n);
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) {
      if (!top.adjacency[k][l]) continue;
      top.neighbors[k].push_back(l);
      if (top.same_cluster(k, l)) {
        top.cluster_neighbors[k].push_back(l);
      } else {
        top.foreign_neighbors[k].push_back(l);
      }
    }
  }
  return top;
}

Eigen::MatrixXd metropolis_weights(const Topology& top) {
  const int n = top.node_count;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    const auto nk = static_cast<double>(top.cluster_neighbors[k].size());
    double off_sum = 0.0;
    for (int l : top.cluster_neighbors[k]) {
      if (l == k) continue;
      const auto nl = static_cast<double>(top.cluster_neighbors[l].size());
      a(l, k) = 1.0 / std::max(nk, nl);
      off_sum += a(l, k);
    }
    a(k, k) = 1.0 - off_sum;
  }
  return a;
}

Eigen::MatrixXd uniform_regularization(const Topology& top) {
  const int n = top.node_count;
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    const auto& foreign = top.foreign_neighbors[k];
    if (foreign.empty()) continue;
    const double w = 1.0 / static_cast<double>(foreign.size());
    for (int l : foreign) p(k, l) = w;
  }
  return p;
}

void WeightMatrices::validate(const Topology& top) const {
  const int n = top.node_count;
  if (combine.rows() != n || combine.cols() != n || regularize.rows() != n ||
      regularize.cols() != n || step_size.size() != n || coupling_strength.size() != n) {
    throw std::invalid_argument("weights: dimension mismatch with topology");
  }
  if (epsilon <= 0.0) throw std::invalid_argument("weights: epsilon must be positive");
  for (int k = 0; k < n; ++k) {
    if (step_size[k] <= 0.0) throw std::invalid_argument("weights: step size must be positive");
    if (coupling_strength[k] < 0.0) {
      throw std::invalid_argument("weights: coupling strength must be nonnegative");
    }
    if (std::abs(combine.col(k).sum() - 1.0) > 1e-12) {
      throw std::invalid_argument("weights: combination column " + std::to_string(k + 1) +
                                  " does not sum to 1");
    }
    const double row = regularize.row(k).sum();
    const bool has_foreign = !top.foreign_neighbors[k].empty();
    if (has_foreign ? std::abs(row - 1.0) > 1e-12 : row != 0.0) {
      throw std::invalid_argument("weights: regularization row " + std::to_string(k + 1) +
                                  " inconsistent with foreign neighborhood");
    }
  }
}

WeightMatrices default_weights(const Topology& top, double mu, double eta,
                               double epsilon) {
  WeightMatrices w;
  w.combine = metropolis_weights(top);
  w.regularize = uniform_regularization(top);
  w.step_size = Eigen::VectorXd::Constant(top.node_count, mu);
  w.coupling_strength = Eigen::VectorXd::Constant(top.node_count, eta);
  w.epsilon = epsilon;
  w.validate(top);
  return w;
}

}  // namespace pdapa

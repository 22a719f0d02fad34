#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdapa {

enum class TopologyErrorKind {
  not_square,
  non_symmetric,
  disconnected,
  empty_cluster,
  bad_cluster_ids,
};

class TopologyError : public std::invalid_argument {
 public:
  TopologyError(TopologyErrorKind kind, const std::string& what)
      : std::invalid_argument(what), kind_(kind) {}
  TopologyErrorKind kind() const { return kind_; }

 private:
  TopologyErrorKind kind_;
};

// Clustered network graph. Neighborhoods always include the node itself;
// foreign_neighbors(k) = neighbors outside k's cluster (never includes k).
struct Topology {
  int node_count = 0;
  int cluster_count = 0;
  std::vector<std::vector<bool>> adjacency;  // symmetric, true diagonal
  std::vector<int> cluster_of;               // 0-based cluster ids
  std::vector<std::vector<int>> neighbors;
  std::vector<std::vector<int>> cluster_neighbors;  // same-cluster neighbors, incl. self
  std::vector<std::vector<int>> foreign_neighbors;  // other-cluster neighbors

  bool same_cluster(int a, int b) const { return cluster_of[a] == cluster_of[b]; }
};

// Validates and derives neighbor sets. Self-loops are forced on. Throws
// TopologyError on non-square/non-symmetric adjacency, non-contiguous or
// empty clusters, or a disconnected graph.
Topology build_topology(const std::vector<std::vector<bool>>& adjacency,
                        const std::vector<int>& cluster_of);

// Metropolis combination weights restricted to in-cluster neighborhoods:
// entry (l, k) weights node l's intermediate in node k's combination,
// a(l,k) = 1/max(n_k, n_l) with n_k = |cluster_neighbors(k)|, and the
// self-weight absorbs the remainder. Every column sums to 1.
Eigen::MatrixXd metropolis_weights(const Topology& top);

// Uniform inter-cluster regularization weights: row k spreads equal weight
// over foreign_neighbors(k); rows with no foreign neighbors are zero.
Eigen::MatrixXd uniform_regularization(const Topology& top);

// Per-node algorithm weights. combine(l,k) multiplies neighbor l's
// intermediate at node k; regularize(k,l) multiplies the masked estimate
// difference pulled from foreign neighbor l.
struct WeightMatrices {
  Eigen::MatrixXd combine;           // columns sum to 1
  Eigen::MatrixXd regularize;        // rows sum to 1 or 0
  Eigen::VectorXd step_size;         // per node, > 0
  Eigen::VectorXd coupling_strength; // per node eta, >= 0
  double epsilon = 1e-5;             // projection solve regularizer, > 0

  void validate(const Topology& top) const;
};

WeightMatrices default_weights(const Topology& top, double mu, double eta,
                               double epsilon);

}  // namespace pdapa

#pragma once

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "topology.hpp"

namespace pdapa {

// First-order autoregressive Gaussian input plus white observation noise.
struct NodeSignalModel {
  double ar_coeff = 0.0;   // pole in [0, 1)
  double input_var = 1.0;  // stationary regressor variance
  double noise_var = 1e-3; // observation noise variance

  void validate() const;
};

// Per-cluster optima w*_k = base + delta_C * cluster_dir_C; equal within a cluster.
struct OptimalWeights {
  Eigen::VectorXd base;                        // unit norm
  std::vector<double> delta;                   // one per cluster
  std::vector<Eigen::VectorXd> cluster_dir;    // one per cluster
  std::vector<Eigen::VectorXd> node_optimum;   // one per node

  Eigen::VectorXd stacked() const;
};

OptimalWeights make_optimal_weights(int filter_length, const Topology& top,
                                    const std::vector<double>& delta,
                                    std::mt19937_64& rng);

// Draws per-node signal statistics from the documented default ranges:
// ar_coeff in [0, 0.5], input_var in [0.8, 1.2], noise_var in [1e-3, 1e-2].
std::vector<NodeSignalModel> draw_signal_models(int node_count, std::mt19937_64& rng);

// Scalar AR(1) stream: u(n) = a*u(n-1) + g(n) with g scaled so the stationary
// variance equals input_var. History before the first sample is zero.
std::vector<double> generate_regressors(const NodeSignalModel& model, int length,
                                        std::mt19937_64& rng);

// d = u'w* + noise. Throws on length mismatch.
double observe(const Eigen::VectorXd& w_star, const Eigen::VectorXd& regressor,
               double noise);

// Last projection_order regressor rows and desired samples, newest first.
struct DataBlock {
  Eigen::MatrixXd inputs;   // P x L
  Eigen::VectorXd desired;  // P
};

// Stacks the newest block_rows entries of a (time-ordered, oldest first)
// history into a DataBlock, padding with zeros when history is short.
DataBlock stack_block(const std::vector<Eigen::VectorXd>& regressors,
                      const std::vector<double>& desired, int block_rows);

// Streams one node's data: advances the AR input, forms the tapped-delay
// regressor, observes the desired sample, and maintains the sliding block.
class NodeSource {
 public:
  NodeSource(const NodeSignalModel& model, int filter_length, int block_rows,
             Eigen::VectorXd optimum, std::mt19937_64 input_rng,
             std::mt19937_64 noise_rng);

  void advance();

  const DataBlock& block() const { return block_; }
  const Eigen::VectorXd& optimum() const { return optimum_; }
  // Newest regressor vector (row 0 of the block).
  Eigen::VectorXd current_regressor() const { return block_.inputs.row(0); }

 private:
  NodeSignalModel model_;
  double innovation_std_;
  double prev_input_ = 0.0;
  Eigen::VectorXd optimum_;
  Eigen::VectorXd taps_;  // newest-first scalar history, length L
  DataBlock block_;
  std::mt19937_64 input_rng_;
  std::mt19937_64 noise_rng_;
  // One distribution per engine: normal_distribution carries carry-over state.
  std::normal_distribution<double> input_gauss_{0.0, 1.0};
  std::normal_distribution<double> noise_gauss_{0.0, 1.0};
};

}  // namespace pdapa

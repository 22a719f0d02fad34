#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "selection.hpp"
#include "signal_model.hpp"
#include "topology.hpp"

namespace pdapa {

class InstabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TheorySettings {
  int samples = 20000;       // Monte-Carlo samples for the data moments
  std::uint64_t seed = 0;    // experiment seed; a fixed offset is applied inside
  int dimension_cap = 48;    // maximum N*L the dense engine will accept
};

// Network-level model for the mean and mean-square analysis. Deterministic
// matrices are expanded to N*L dimension; data-dependent moments (the
// projection operator Z = U^T (eps I + U U^T)^{-1} U and the solve gain
// W = (eps I + U U^T)^{-1} U) are Monte-Carlo estimates per node.
struct GlobalModel {
  int node_count = 0;
  int filter_length = 0;
  int block_rows = 0;
  SelectionScheme scheme = SelectionScheme::uncoordinated;
  int shared_entries = 0;
  double transmit_probability = 0.0;

  Topology topology;
  Eigen::MatrixXd combine;      // node-level combination weights
  Eigen::MatrixXd regularize;   // node-level regularization weights
  Eigen::VectorXd step_size;
  Eigen::VectorXd coupling_strength;
  double epsilon = 1e-5;
  std::vector<NodeSignalModel> signals;
  Eigen::VectorXd optimum;      // stacked per-node optima

  Eigen::MatrixXd combine_expanded;     // combine^T pattern lifted to NL
  Eigen::MatrixXd regularize_expanded;
  Eigen::MatrixXd coupling_graph;       // regularize_expanded - I
  Eigen::MatrixXd mean_coupling;        // p * coupling_graph
  Eigen::MatrixXd mean_combine;         // p * combine_expanded^T + (1-p) I
  Eigen::VectorXd step_diag;            // NL diagonal of the step-size matrix
  Eigen::VectorXd coupling_diag;        // NL diagonal of the coupling matrix

  std::vector<Eigen::MatrixXd> projection_mean_node;   // E[Z_k], L x L
  Eigen::MatrixXd projection_mean;                     // block diagonal, NL x NL
  std::vector<Eigen::MatrixXd> projection_kron_node;   // E[Z_k kron Z_k], L^2 x L^2
  std::vector<Eigen::MatrixXd> gain_gram_node;         // E[W_k^T W_k], L x L

  Eigen::Index dim() const { return static_cast<Eigen::Index>(node_count) * filter_length; }
};

// Per-node Monte-Carlo data moments from stationary AR windows.
struct NodeDataMoments {
  Eigen::MatrixXd projection_mean;  // E[Z_k]
  Eigen::MatrixXd projection_kron;  // E[Z_k kron Z_k]
  Eigen::MatrixXd gain_gram;        // E[W_k^T W_k]
};

NodeDataMoments estimate_node_moments(const NodeSignalModel& model, int filter_length,
                                      int block_rows, double epsilon, int samples,
                                      std::mt19937_64& rng);

GlobalModel build_global_model(const Topology& top, const WeightMatrices& weights,
                               const std::vector<NodeSignalModel>& signals,
                               SelectionScheme scheme, int shared_entries,
                               int block_rows, const Eigen::VectorXd& stacked_optimum,
                               const TheorySettings& settings);

// Sufficient mean-stability step bound 2 / (max_k lambda_max(E[Z_k]) + 2*eta*p).
double mean_step_bound(const std::vector<Eigen::MatrixXd>& projection_mean_node,
                       double coupling_strength, double transmit_probability);
double mean_step_bound(const GlobalModel& model);

struct MeanPrediction {
  Eigen::MatrixXd transition;            // mean_combine * (I - D Zbar + D eta Qbar)
  Eigen::VectorXd driving;
  double spectral_radius = 0.0;
  bool stable = false;
  std::vector<Eigen::VectorXd> trajectory;  // E[w_err(n)], n = 0..steps
  Eigen::VectorXd asymptotic_bias;          // fixed point of the recursion
};

MeanPrediction mean_recursion(const GlobalModel& model, int steps);

// Second-order mask expectations in block-Kronecker coordinates.
// transposed=true yields E[X^T kron_b X^T]; false yields E[X kron_b X].
// The assembled route expands every entry of the combination/coupling matrix
// as an affine function of mask bits and applies the cross-moment table, so
// it is exact for every scheme; the closed route is the paper's periodic
// mixture form. For the periodic scheme both agree entrywise.
Eigen::MatrixXd combine_second_moment_assembled(const GlobalModel& model, bool transposed);
Eigen::MatrixXd coupling_second_moment_assembled(const GlobalModel& model, bool transposed);
Eigen::MatrixXd combine_second_moment_closed(const GlobalModel& model, bool transposed);
Eigen::MatrixXd coupling_second_moment_closed(const GlobalModel& model, bool transposed);
Eigen::MatrixXd combine_second_moment(const GlobalModel& model, bool transposed);
Eigen::MatrixXd coupling_second_moment(const GlobalModel& model, bool transposed);

// E[Z kron_b Z] assembled from per-node Monte-Carlo moments; independence
// across nodes gives the cross blocks as Kronecker products of means.
Eigen::MatrixXd projection_second_moment(const GlobalModel& model);

// The variance-relation transition matrix (the weighted recursion operator).
Eigen::MatrixXd build_variance_transition(const GlobalModel& model);

// Noise energy vector: pairs with a weighting vector to give the injected
// noise power per iteration.
Eigen::VectorXd noise_vector(const GlobalModel& model);

struct VarianceModel {
  Eigen::MatrixXd transition;  // F
  double spectral_radius = 0.0;
  bool stable = false;
  Eigen::VectorXd noise_energy;   // gamma
  Eigen::VectorXd bias_energy;    // r_b
  Eigen::MatrixXd bias_cross_a;   // maps bvec(w* m^T) to alpha_1
  Eigen::MatrixXd bias_cross_b;   // maps bvec(m w*^T) to alpha_2
  bool has_bias_terms = false;    // false when eta or p vanishes
};

VarianceModel build_variance_model(const GlobalModel& model);

struct BiasTerms {
  Eigen::VectorXd bias_energy;
  Eigen::VectorXd alpha1;
  Eigen::VectorXd alpha2;
};

// Bias-coupling vectors for a given mean error E[w_err(n)].
BiasTerms bias_terms(const GlobalModel& model, const VarianceModel& var,
                     const Eigen::VectorXd& mean_error);

// Weighting vectors (bvec of the weighting matrix).
Eigen::VectorXd uniform_weighting(int node_count, int filter_length);
Eigen::VectorXd normalized_weighting(const std::vector<Eigen::VectorXd>& node_optima);

// Weighted mean-square deviation predictions. transient_msd returns the
// sequence for n = 0..iterations-1 starting from w(0) = 0; both throw
// InstabilityError when the variance recursion is unstable.
std::vector<double> transient_msd(const GlobalModel& model, const VarianceModel& var,
                                  int iterations, const Eigen::VectorXd& weighting);
double steady_state_msd(const GlobalModel& model, const VarianceModel& var,
                        const Eigen::VectorXd& weighting);

double spectral_radius(const Eigen::MatrixXd& m);

}  // namespace pdapa

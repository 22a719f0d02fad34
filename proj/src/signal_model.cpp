#include "signal_model.hpp"

#include <cmath>
#include <stdexcept>

namespace pdapa {

void NodeSignalModel::validate() const {
  if (ar_coeff < 0.0 || ar_coeff >= 1.0) {
    throw std::invalid_argument("signal: ar_coeff must lie in [0, 1)");
  }
  if (input_var <= 0.0 || noise_var <= 0.0) {
    throw std::invalid_argument("signal: variances must be positive");
  }
}

Eigen::VectorXd OptimalWeights::stacked() const {
  const auto n = static_cast<Eigen::Index>(node_optimum.size());
  const auto l = node_optimum.empty() ? 0 : node_optimum.front().size();
  Eigen::VectorXd out(n * l);
  for (Eigen::Index k = 0; k < n; ++k) out.segment(k * l, l) = node_optimum[k];
  return out;
}

OptimalWeights make_optimal_weights(int filter_length, const Topology& top,
                                    const std::vector<double>& delta,
                                    std::mt19937_64& rng) {
  if (static_cast<int>(delta.size()) != top.cluster_count) {
    throw std::invalid_argument("optimum: need one delta per cluster");
  }
  std::normal_distribution<double> gauss(0.0, 1.0);
  OptimalWeights w;
  w.delta = delta;
  w.base.resize(filter_length);
  for (int i = 0; i < filter_length; ++i) w.base[i] = gauss(rng);
  w.base.normalize();
  w.cluster_dir.resize(top.cluster_count);
  for (int c = 0; c < top.cluster_count; ++c) {
    w.cluster_dir[c].resize(filter_length);
    for (int i = 0; i < filter_length; ++i) w.cluster_dir[c][i] = gauss(rng);
  }
  w.node_optimum.resize(top.node_count);
  for (int k = 0; k < top.node_count; ++k) {
    const int c = top.cluster_of[k];
    w.node_optimum[k] = w.base + delta[c] * w.cluster_dir[c];
  }
  return w;
}

std::vector<NodeSignalModel> draw_signal_models(int node_count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ar(0.0, 0.5);
  std::uniform_real_distribution<double> var(0.8, 1.2);
  std::uniform_real_distribution<double> noise(1e-3, 1e-2);
  std::vector<NodeSignalModel> models(node_count);
  for (auto& m : models) {
    m.ar_coeff = ar(rng);
    m.input_var = var(rng);
    m.noise_var = noise(rng);
    m.validate();
  }
  return models;
}

std::vector<double> generate_regressors(const NodeSignalModel& model, int length,
                                        std::mt19937_64& rng) {
  model.validate();
  if (length < 1) throw std::invalid_argument("signal: length must be >= 1");
  const double a = model.ar_coeff;
  const double innovation_std = std::sqrt(model.input_var * (1.0 - a * a));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> out(length);
  double prev = 0.0;
  for (int n = 0; n < length; ++n) {
    prev = a * prev + innovation_std * gauss(rng);
    out[n] = prev;
  }
  return out;
}

double observe(const Eigen::VectorXd& w_star, const Eigen::VectorXd& regressor,
               double noise) {
  if (w_star.size() != regressor.size()) {
    throw std::invalid_argument("observe: vector lengths differ");
  }
  return regressor.dot(w_star) + noise;
}

DataBlock stack_block(const std::vector<Eigen::VectorXd>& regressors,
                      const std::vector<double>& desired, int block_rows) {
  if (regressors.size() != desired.size()) {
    throw std::invalid_argument("stack_block: history lengths differ");
  }
  const auto have = static_cast<int>(regressors.size());
  const auto l = have > 0 ? regressors.back().size() : 0;
  DataBlock blk;
  blk.inputs = Eigen::MatrixXd::Zero(block_rows, l);
  blk.desired = Eigen::VectorXd::Zero(block_rows);
  for (int p = 0; p < block_rows && p < have; ++p) {
    blk.inputs.row(p) = regressors[have - 1 - p];
    blk.desired[p] = desired[have - 1 - p];
  }
  return blk;
}

NodeSource::NodeSource(const NodeSignalModel& model, int filter_length, int block_rows,
                       Eigen::VectorXd optimum, std::mt19937_64 input_rng,
                       std::mt19937_64 noise_rng)
    : model_(model),
      optimum_(std::move(optimum)),
      input_rng_(std::move(input_rng)),
      noise_rng_(std::move(noise_rng)) {
  model_.validate();
  if (optimum_.size() != filter_length) {
    throw std::invalid_argument("source: optimum length differs from filter length");
  }
  const double a = model_.ar_coeff;
  innovation_std_ = std::sqrt(model_.input_var * (1.0 - a * a));
  taps_ = Eigen::VectorXd::Zero(filter_length);
  block_.inputs = Eigen::MatrixXd::Zero(block_rows, filter_length);
  block_.desired = Eigen::VectorXd::Zero(block_rows);
}

void NodeSource::advance() {
  prev_input_ = model_.ar_coeff * prev_input_ + innovation_std_ * input_gauss_(input_rng_);
  const auto l = taps_.size();
  for (Eigen::Index i = l - 1; i > 0; --i) taps_[i] = taps_[i - 1];
  taps_[0] = prev_input_;

  const double noise = std::sqrt(model_.noise_var) * noise_gauss_(noise_rng_);
  const double d = taps_.dot(optimum_) + noise;

  const auto rows = block_.inputs.rows();
  for (Eigen::Index p = rows - 1; p > 0; --p) {
    block_.inputs.row(p) = block_.inputs.row(p - 1);
    block_.desired[p] = block_.desired[p - 1];
  }
  block_.inputs.row(0) = taps_;
  block_.desired[0] = d;
}

}  // namespace pdapa

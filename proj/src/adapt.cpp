#include "adapt.hpp"

#include <stdexcept>

namespace pdapa {

DiffusionMode parse_mode(const std::string& name) {
  if (name == "full") return DiffusionMode::full;
  if (name == "partial") return DiffusionMode::partial;
  throw std::invalid_argument("adapt: unknown mode '" + name + "'");
}

std::string mode_name(DiffusionMode mode) {
  return mode == DiffusionMode::full ? "full" : "partial";
}

Eigen::VectorXd adapt_step(const Eigen::VectorXd& estimate, const DataBlock& block,
                           double step_size, double coupling_strength, double epsilon,
                           const std::vector<CouplingTerm>& coupling) {
  if (block.inputs.cols() != estimate.size()) {
    throw std::invalid_argument("adapt: block width differs from estimate length");
  }
  if (!block.inputs.allFinite() || !block.desired.allFinite() || !estimate.allFinite()) {
    throw std::invalid_argument("adapt: non-finite input data");
  }
  Eigen::MatrixXd gram = block.inputs * block.inputs.transpose();
  gram.diagonal().array() += epsilon;
  const Eigen::VectorXd error = block.desired - block.inputs * estimate;
  const Eigen::VectorXd gain = Eigen::LLT<Eigen::MatrixXd>(gram).solve(error);
  Eigen::VectorXd next = estimate + step_size * (block.inputs.transpose() * gain);

  if (coupling_strength != 0.0 && !coupling.empty()) {
    Eigen::VectorXd pull = Eigen::VectorXd::Zero(estimate.size());
    for (const auto& term : coupling) {
      const Eigen::VectorXd diff = *term.neighbor_estimate - estimate;
      if (term.mask != nullptr) {
        pull.array() += term.weight * (term.mask->array() * diff.array());
      } else {
        pull += term.weight * diff;
      }
    }
    next += (step_size * coupling_strength) * pull;
  }
  return next;
}

Eigen::VectorXd combine_step(const Eigen::VectorXd& intermediate,
                             const std::vector<CombineTerm>& neighbors) {
  Eigen::VectorXd out = intermediate;
  for (const auto& term : neighbors) {
    const Eigen::VectorXd& neighbor = *term.neighbor_intermediate;
    if (term.mask != nullptr) {
      out.array() +=
          term.weight * (term.mask->array() * (neighbor - intermediate).array());
    } else {
      out += term.weight * (neighbor - intermediate);
    }
  }
  return out;
}

Network::Network(const Topology& top, const WeightMatrices& weights, int filter_length,
                 int block_rows, DiffusionMode mode)
    : top_(&top), weights_(weights), mode_(mode) {
  if (filter_length < 1 || block_rows < 1) {
    throw std::invalid_argument("network: filter length and block rows must be >= 1");
  }
  weights_.validate(top);
  estimates_.assign(top.node_count, Eigen::VectorXd::Zero(filter_length));
  intermediates_.assign(top.node_count, Eigen::VectorXd::Zero(filter_length));
}

void Network::step(const std::vector<DataBlock>& blocks,
                   const std::vector<Eigen::ArrayXd>& masks) {
  const int n = top_->node_count;
  if (static_cast<int>(blocks.size()) != n) {
    throw std::invalid_argument("network: one data block per node required");
  }
  const bool masked = mode_ == DiffusionMode::partial;
  if (masked && static_cast<int>(masks.size()) != n) {
    throw std::invalid_argument("network: one mask per node required in partial mode");
  }

  for (int k = 0; k < n; ++k) {
    std::vector<CouplingTerm> coupling;
    coupling.reserve(top_->foreign_neighbors[k].size());
    for (int l : top_->foreign_neighbors[k]) {
      coupling.push_back({weights_.regularize(k, l), &estimates_[l],
                          masked ? &masks[l] : nullptr});
    }
    intermediates_[k] = adapt_step(estimates_[k], blocks[k], weights_.step_size[k],
                                   weights_.coupling_strength[k], weights_.epsilon,
                                   coupling);
  }

  std::vector<Eigen::VectorXd> next(n);
  for (int k = 0; k < n; ++k) {
    std::vector<CombineTerm> terms;
    terms.reserve(top_->cluster_neighbors[k].size());
    for (int l : top_->cluster_neighbors[k]) {
      if (l == k) continue;
      terms.push_back({weights_.combine(l, k), &intermediates_[l],
                       masked ? &masks[l] : nullptr});
    }
    next[k] = combine_step(intermediates_[k], terms);
  }
  estimates_ = std::move(next);
  ++iteration_;
}

}  // namespace pdapa

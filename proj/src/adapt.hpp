#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "selection.hpp"
#include "signal_model.hpp"
#include "topology.hpp"

namespace pdapa {

// full    = every entry of the intermediate estimates is exchanged
// partial = only the masked entries travel; receivers substitute their own
enum class DiffusionMode { full, partial };

DiffusionMode parse_mode(const std::string& name);
std::string mode_name(DiffusionMode mode);

// One affine-projection adaptation with inter-cluster coupling:
//   psi = w + mu * U^T (eps I + U U^T)^{-1} (d - U w)
//           + mu * eta * sum_l rho_l * mask_l .* (w_l - w)
// The P x P system is solved by Cholesky, never an explicit inverse.
// A null mask stands for the all-ones mask of full diffusion.
struct CouplingTerm {
  double weight = 0.0;                    // rho_{k,l}
  const Eigen::VectorXd* neighbor_estimate = nullptr;
  const Eigen::ArrayXd* mask = nullptr;   // selection of the sending neighbor
};

Eigen::VectorXd adapt_step(const Eigen::VectorXd& estimate, const DataBlock& block,
                           double step_size, double coupling_strength, double epsilon,
                           const std::vector<CouplingTerm>& coupling);

// Combination with substituted unsent entries. The convex combination
//   w = a_self * psi + sum_l a_l * (mask_l .* psi_l + (1 - mask_l) .* psi)
// is evaluated in difference form (weights sum to one, so a_self is implied):
//   w = psi + sum_l a_l * mask_l .* (psi_l - psi)
// which keeps unsent entries bit-exactly untouched. A null mask again means
// all entries arrived.
struct CombineTerm {
  double weight = 0.0;                    // a_{l,k}
  const Eigen::VectorXd* neighbor_intermediate = nullptr;
  const Eigen::ArrayXd* mask = nullptr;
};

Eigen::VectorXd combine_step(const Eigen::VectorXd& intermediate,
                             const std::vector<CombineTerm>& neighbors);

// Synchronous adapt-then-combine network state. All adaptations read the
// iteration-n estimates before any combination writes iteration n+1.
class Network {
 public:
  Network(const Topology& top, const WeightMatrices& weights, int filter_length,
          int block_rows, DiffusionMode mode);

  // masks[l] is the selection of sending node l for this iteration; ignored
  // (and may be empty) in full mode.
  void step(const std::vector<DataBlock>& blocks,
            const std::vector<Eigen::ArrayXd>& masks);

  const Eigen::VectorXd& estimate(int node) const { return estimates_[node]; }
  const Eigen::VectorXd& intermediate(int node) const { return intermediates_[node]; }
  long iteration() const { return iteration_; }
  int node_count() const { return static_cast<int>(estimates_.size()); }

 private:
  const Topology* top_;
  WeightMatrices weights_;
  DiffusionMode mode_;
  long iteration_ = 0;
  std::vector<Eigen::VectorXd> estimates_;
  std::vector<Eigen::VectorXd> intermediates_;
};

}  // namespace pdapa

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace pdapa {

// How the M transmitted entries are chosen each iteration.
//   periodic:      deterministic round-robin, identical at every node
//   uncoordinated: fresh random M-subset per node per iteration
//   coordinated:   one random M-subset per iteration shared by all nodes
enum class SelectionScheme { periodic, uncoordinated, coordinated };

SelectionScheme parse_scheme(const std::string& name);
std::string scheme_name(SelectionScheme scheme);

struct SelectionConfig {
  SelectionScheme kind = SelectionScheme::uncoordinated;
  int shared_entries = 0;  // M
  int filter_length = 0;   // L

  double transmit_probability() const {
    return filter_length == 0 ? 0.0
                              : static_cast<double>(shared_entries) / filter_length;
  }
  void validate() const;
};

// Round-robin mask at iteration n: entries {(n*M + j) mod L, j = 0..M-1}.
void periodic_mask(int filter_length, int shared_entries, long iteration,
                   Eigen::ArrayXd& mask);

// Uniform random M-subset via partial Fisher-Yates.
void random_subset_mask(int filter_length, int shared_entries, std::mt19937_64& rng,
                        Eigen::ArrayXd& mask);

// Mask for one (node, iteration); rng is consumed only by the random schemes.
Eigen::ArrayXd select(const SelectionConfig& cfg, int node, long iteration,
                      std::mt19937_64& rng);

// Exact second-order statistics E[s_{r,i} s_{s,j}] used by the analysis.
// The periodic scheme uses the all-pairs value p, which holds per instant for
// equal entries and on period average otherwise.
double cross_moment(SelectionScheme scheme, int shared_entries, int filter_length,
                    bool same_node, bool same_entry);

// A concrete entry pair (entry r at node i, entry s at node j).
struct EntryPair {
  int entry_a = 0;
  int node_a = 0;
  int entry_b = 0;
  int node_b = 0;
};

// Monte-Carlo estimate of E[s_{r,i} s_{s,j}] over independent draws; the
// periodic scheme is sampled over consecutive schedule instants.
double estimate_cross_moment(const SelectionConfig& cfg, const EntryPair& pair,
                             int trials, std::uint64_t seed);

// Per-run mask generator: one call yields the masks of all nodes for the
// next iteration, honoring the coordination pattern of the scheme.
class MaskSource {
 public:
  MaskSource(const SelectionConfig& cfg, int node_count, std::uint64_t seed,
             std::uint64_t run_index);

  // Fills masks[k] for every node; advances to the next iteration.
  void next(std::vector<Eigen::ArrayXd>& masks);

  long iteration() const { return iteration_; }

 private:
  SelectionConfig cfg_;
  int node_count_;
  long iteration_ = 0;
  std::vector<std::mt19937_64> node_rng_;  // uncoordinated
  std::mt19937_64 shared_rng_;             // coordinated
};

}  // namespace pdapa

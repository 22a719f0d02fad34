#include "selection.hpp"

#include <numeric>
#include <stdexcept>

#include "rng.hpp"

namespace pdapa {

SelectionScheme parse_scheme(const std::string& name) {
  if (name == "periodic") return SelectionScheme::periodic;
  if (name == "uncoordinated") return SelectionScheme::uncoordinated;
  if (name == "coordinated") return SelectionScheme::coordinated;
  throw std::invalid_argument("selection: unknown scheme '" + name + "'");
}

std::string scheme_name(SelectionScheme scheme) {
  switch (scheme) {
    case SelectionScheme::periodic: return "periodic";
    case SelectionScheme::uncoordinated: return "uncoordinated";
    case SelectionScheme::coordinated: return "coordinated";
  }
  return "?";
}

void SelectionConfig::validate() const {
  if (filter_length < 1) throw std::invalid_argument("selection: filter length must be >= 1");
  if (shared_entries < 0 || shared_entries > filter_length) {
    throw std::invalid_argument("selection: M must lie in [0, L]");
  }
}

void periodic_mask(int filter_length, int shared_entries, long iteration,
                   Eigen::ArrayXd& mask) {
  mask.setZero(filter_length);
  const long base = iteration * shared_entries;
  for (int j = 0; j < shared_entries; ++j) {
    mask[static_cast<int>((base + j) % filter_length)] = 1.0;
  }
}

void random_subset_mask(int filter_length, int shared_entries, std::mt19937_64& rng,
                        Eigen::ArrayXd& mask) {
  mask.setZero(filter_length);
  if (shared_entries == 0) return;
  // Partial Fisher-Yates over an index pool; first M slots are the subset.
  static thread_local std::vector<int> pool;
  pool.resize(filter_length);
  std::iota(pool.begin(), pool.end(), 0);
  for (int j = 0; j < shared_entries; ++j) {
    std::uniform_int_distribution<int> pick(j, filter_length - 1);
    std::swap(pool[j], pool[pick(rng)]);
    mask[pool[j]] = 1.0;
  }
}

Eigen::ArrayXd select(const SelectionConfig& cfg, int /*node*/, long iteration,
                      std::mt19937_64& rng) {
  cfg.validate();
  Eigen::ArrayXd mask;
  if (cfg.kind == SelectionScheme::periodic) {
    periodic_mask(cfg.filter_length, cfg.shared_entries, iteration, mask);
  } else {
    random_subset_mask(cfg.filter_length, cfg.shared_entries, rng, mask);
  }
  return mask;
}

double cross_moment(SelectionScheme scheme, int shared_entries, int filter_length,
                    bool same_node, bool same_entry) {
  if (shared_entries == 0) return 0.0;
  const double m = shared_entries;
  const double l = filter_length;
  const double p = m / l;
  const double paired = (l > 1) ? p * (m - 1) / (l - 1) : p;
  switch (scheme) {
    case SelectionScheme::periodic:
      return p;
    case SelectionScheme::coordinated:
      return same_entry ? p : paired;
    case SelectionScheme::uncoordinated:
      if (!same_node) return p * p;
      return same_entry ? p : paired;
  }
  return 0.0;
}

double estimate_cross_moment(const SelectionConfig& cfg, const EntryPair& pair,
                             int trials, std::uint64_t seed) {
  cfg.validate();
  if (trials < 1) throw std::invalid_argument("selection: trials must be >= 1");
  auto rng_a = make_stream(seed, StreamTag::mask, static_cast<std::uint64_t>(pair.node_a));
  auto rng_b = make_stream(seed, StreamTag::mask, static_cast<std::uint64_t>(pair.node_b));
  Eigen::ArrayXd mask_a, mask_b;
  double acc = 0.0;
  for (int t = 0; t < trials; ++t) {
    switch (cfg.kind) {
      case SelectionScheme::periodic:
        periodic_mask(cfg.filter_length, cfg.shared_entries, t, mask_a);
        mask_b = mask_a;
        break;
      case SelectionScheme::coordinated:
        random_subset_mask(cfg.filter_length, cfg.shared_entries, rng_a, mask_a);
        mask_b = mask_a;
        break;
      case SelectionScheme::uncoordinated:
        random_subset_mask(cfg.filter_length, cfg.shared_entries, rng_a, mask_a);
        if (pair.node_a == pair.node_b) {
          mask_b = mask_a;
        } else {
          random_subset_mask(cfg.filter_length, cfg.shared_entries, rng_b, mask_b);
        }
        break;
    }
    acc += mask_a[pair.entry_a] * mask_b[pair.entry_b];
  }
  return acc / trials;
}

MaskSource::MaskSource(const SelectionConfig& cfg, int node_count, std::uint64_t seed,
                       std::uint64_t run_index)
    : cfg_(cfg), node_count_(node_count) {
  cfg_.validate();
  if (cfg_.kind == SelectionScheme::uncoordinated) {
    node_rng_.reserve(node_count);
    for (int k = 0; k < node_count; ++k) {
      node_rng_.push_back(make_stream(seed, StreamTag::mask, run_index,
                                      static_cast<std::uint64_t>(k)));
    }
  } else if (cfg_.kind == SelectionScheme::coordinated) {
    shared_rng_ = make_stream(seed, StreamTag::coordinated_mask, run_index);
  }
}

void MaskSource::next(std::vector<Eigen::ArrayXd>& masks) {
  masks.resize(node_count_);
  switch (cfg_.kind) {
    case SelectionScheme::periodic: {
      periodic_mask(cfg_.filter_length, cfg_.shared_entries, iteration_, masks[0]);
      for (int k = 1; k < node_count_; ++k) masks[k] = masks[0];
      break;
    }
    case SelectionScheme::coordinated: {
      random_subset_mask(cfg_.filter_length, cfg_.shared_entries, shared_rng_, masks[0]);
      for (int k = 1; k < node_count_; ++k) masks[k] = masks[0];
      break;
    }
    case SelectionScheme::uncoordinated: {
      for (int k = 0; k < node_count_; ++k) {
        random_subset_mask(cfg_.filter_length, cfg_.shared_entries, node_rng_[k], masks[k]);
      }
      break;
    }
  }
  ++iteration_;
}

}  // namespace pdapa

#include "selftest.hpp"

#include <cmath>
#include <sstream>

#include "blockalg.hpp"
#include "harness.hpp"
#include "rng.hpp"

namespace pdapa {

namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig cfg;
  cfg.adjacency = {
      {true, true, true, false},
      {true, true, true, true},
      {true, true, true, true},
      {false, true, true, true},
  };
  cfg.cluster_of = {0, 0, 1, 1};
  cfg.filter_length = 6;
  cfg.block_rows = 2;
  cfg.scheme = SelectionScheme::uncoordinated;
  cfg.step_sizes = {0.4};
  cfg.coupling_strength = 0.01;
  cfg.iterations = 120;
  cfg.runs = 1;
  cfg.seed = 2024;
  return cfg;
}

}  // namespace

SelftestResult run_selftest() {
  SelftestResult result;
  auto record = [&](const std::string& name, bool ok, const std::string& detail) {
    result.checks.push_back({name, ok, detail});
  };

  {  // Selection moment table vs Monte-Carlo, uncoordinated and coordinated.
    bool ok = true;
    std::ostringstream detail;
    const int trials = 20000;
    for (auto scheme : {SelectionScheme::uncoordinated, SelectionScheme::coordinated}) {
      SelectionConfig cfg{scheme, 2, 4};
      const struct {
        EntryPair pair;
        bool same_node, same_entry;
      } cells[] = {
          {{1, 0, 1, 0}, true, true},
          {{1, 0, 3, 0}, true, false},
          {{2, 0, 2, 1}, false, true},
          {{2, 0, 3, 1}, false, false},
      };
      for (const auto& cell : cells) {
        const double expected =
            cross_moment(scheme, cfg.shared_entries, cfg.filter_length, cell.same_node,
                         cell.same_entry);
        const double estimate = estimate_cross_moment(cfg, cell.pair, trials, 77);
        const double p = cfg.transmit_probability();
        const double tol = 5.0 * std::sqrt(p * (1.0 - p) / trials);
        if (std::abs(estimate - expected) >= tol) {
          ok = false;
          detail << scheme_name(scheme) << " cell off by "
                 << std::abs(estimate - expected) << "; ";
        }
      }
    }
    record("selection cross-moments", ok, detail.str());
  }

  {  // bvec / block-Kronecker defining identity on random triples.
    auto rng = make_stream(99, StreamTag::selftest);
    std::normal_distribution<double> gauss(0.0, 1.0);
    bool ok = true;
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
      const int blocks = 2 + rep % 2;
      const int bs = 2 + (rep / 2) % 2;
      const int dim = blocks * bs;
      Eigen::MatrixXd left(dim, dim), right(dim, dim), sigma(dim, dim);
      for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
          left(i, j) = gauss(rng);
          right(i, j) = gauss(rng);
          sigma(i, j) = gauss(rng);
        }
      }
      const Eigen::VectorXd direct = bvec(right * sigma * left.transpose(), bs);
      const Eigen::VectorXd mapped = block_kron(left, right, bs) * bvec(sigma, bs);
      const double rel = (direct - mapped).norm() / std::max(1.0, direct.norm());
      worst = std::max(worst, rel);
      if (rel > 1e-12) ok = false;
    }
    record("block vectorization identity", ok,
           "worst relative gap " + std::to_string(worst));
  }

  {  // Metropolis columns sum to one.
    auto cfg = tiny_config();
    const auto top = build_topology(cfg.adjacency, cfg.cluster_of);
    const auto a = metropolis_weights(top);
    double worst = 0.0;
    for (int k = 0; k < top.node_count; ++k) {
      worst = std::max(worst, std::abs(a.col(k).sum() - 1.0));
    }
    record("combination column sums", worst < 1e-12,
           "worst column deviation " + std::to_string(worst));
  }

  {  // Reduction equivalences: M = L matches full diffusion, M = 0 isolates nodes.
    auto cfg = tiny_config();
    const auto setup = build_setup(cfg);
    const int n = setup.topology.node_count;
    const int l = cfg.filter_length;

    auto make_sources = [&]() {
      std::vector<NodeSource> sources;
      sources.reserve(n);
      for (int k = 0; k < n; ++k) {
        sources.emplace_back(setup.signals[k], l, cfg.block_rows,
                             setup.optimum.node_optimum[k],
                             make_stream(cfg.seed, StreamTag::regressor, 0, k),
                             make_stream(cfg.seed, StreamTag::noise, 0, k));
      }
      return sources;
    };

    Network masked(setup.topology, setup.weights, l, cfg.block_rows,
                   DiffusionMode::partial);
    Network plain(setup.topology, setup.weights, l, cfg.block_rows, DiffusionMode::full);
    auto src_a = make_sources();
    auto src_b = make_sources();
    std::vector<Eigen::ArrayXd> all_on(n, Eigen::ArrayXd::Ones(l));
    std::vector<Eigen::ArrayXd> none;
    std::vector<DataBlock> blocks(n);
    double gap_full = 0.0;
    for (int iter = 0; iter < 60; ++iter) {
      for (int k = 0; k < n; ++k) {
        src_a[k].advance();
        blocks[k] = src_a[k].block();
      }
      masked.step(blocks, all_on);
      for (int k = 0; k < n; ++k) {
        src_b[k].advance();
        blocks[k] = src_b[k].block();
      }
      plain.step(blocks, none);
      for (int k = 0; k < n; ++k) {
        gap_full = std::max(
            gap_full, (masked.estimate(k) - plain.estimate(k)).cwiseAbs().maxCoeff());
      }
    }

    Network isolated(setup.topology, setup.weights, l, cfg.block_rows,
                     DiffusionMode::partial);
    auto src_c = make_sources();
    auto src_d = make_sources();
    std::vector<Eigen::VectorXd> solo(n, Eigen::VectorXd::Zero(l));
    std::vector<Eigen::ArrayXd> all_off(n, Eigen::ArrayXd::Zero(l));
    double gap_zero = 0.0;
    for (int iter = 0; iter < 60; ++iter) {
      for (int k = 0; k < n; ++k) {
        src_c[k].advance();
        blocks[k] = src_c[k].block();
      }
      isolated.step(blocks, all_off);
      for (int k = 0; k < n; ++k) {
        src_d[k].advance();
        solo[k] = adapt_step(solo[k], src_d[k].block(), setup.weights.step_size[k],
                             0.0, setup.weights.epsilon, {});
        gap_zero = std::max(gap_zero,
                            (isolated.estimate(k) - solo[k]).cwiseAbs().maxCoeff());
      }
    }

    // M = L is arithmetic-identical; M = 0 differs only by combination
    // weight rounding, so it sits at rounding level rather than zero.
    record("reduction equivalences", gap_full == 0.0 && gap_zero < 1e-12,
           "full gap " + std::to_string(gap_full) + ", zero gap " +
               std::to_string(gap_zero));
  }

  return result;
}

}  // namespace pdapa

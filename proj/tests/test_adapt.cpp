#include <doctest.h>

#include <cmath>
#include <random>

#include "adapt.hpp"
#include "harness.hpp"
#include "rng.hpp"

using namespace pdapa;

namespace {

DataBlock random_block(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  DataBlock blk;
  blk.inputs.resize(rows, cols);
  blk.desired.resize(rows);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) blk.inputs(i, j) = gauss(rng);
    blk.desired[i] = gauss(rng);
  }
  return blk;
}

ExperimentConfig mesh_config() {
  ExperimentConfig cfg;
  cfg.adjacency = {
      {true, true, true, false, false},
      {true, true, true, true, false},
      {true, true, true, true, true},
      {false, true, true, true, true},
      {false, false, true, true, true},
  };
  cfg.cluster_of = {0, 0, 0, 1, 1};
  cfg.filter_length = 6;
  cfg.block_rows = 2;
  cfg.shared_entries = 3;
  cfg.scheme = SelectionScheme::uncoordinated;
  cfg.step_sizes = {0.5};
  cfg.coupling_strength = 0.005;
  cfg.epsilon = 1e-4;
  cfg.iterations = 200;
  cfg.runs = 1;
  cfg.seed = 314;
  return cfg;
}

}  // namespace

TEST_CASE("zero step size freezes the estimate") {
  auto rng = make_stream(1, StreamTag::selftest);
  const auto blk = random_block(3, 5, rng);
  Eigen::VectorXd w = Eigen::VectorXd::LinSpaced(5, -1.0, 1.0);
  const auto psi = adapt_step(w, blk, 0.0, 0.5, 1e-5, {});
  CHECK((psi - w).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("projection order one with no coupling is normalized lms") {
  auto rng = make_stream(2, StreamTag::selftest);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int l = 6;
  Eigen::VectorXd u(l), w(l);
  for (int i = 0; i < l; ++i) {
    u[i] = gauss(rng);
    w[i] = gauss(rng);
  }
  const double d = gauss(rng);
  const double mu = 0.7;
  const double eps = 1e-3;
  DataBlock blk;
  blk.inputs = u.transpose();
  blk.desired.resize(1);
  blk.desired[0] = d;
  const auto psi = adapt_step(w, blk, mu, 0.0, eps, {});
  const Eigen::VectorXd nlms =
      w + mu * u * (d - u.dot(w)) / (eps + u.squaredNorm());
  CHECK((psi - nlms).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("unit step projects onto the data subspace") {
  // With mu = 1 and vanishing regularizer the a-posteriori residual is zero.
  auto rng = make_stream(3, StreamTag::selftest);
  const auto blk = random_block(4, 8, rng);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(8);
  const auto psi = adapt_step(w, blk, 1.0, 0.0, 1e-12, {});
  const double residual = (blk.desired - blk.inputs * psi).norm();
  CHECK(residual < 1e-6 * blk.desired.norm());
}

TEST_CASE("adaptation rejects non-finite data") {
  auto rng = make_stream(4, StreamTag::selftest);
  auto blk = random_block(2, 4, rng);
  blk.inputs(1, 2) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(adapt_step(Eigen::VectorXd::Zero(4), blk, 0.5, 0.0, 1e-5, {}),
                  std::invalid_argument);
}

TEST_CASE("coupling pulls toward masked neighbor differences") {
  const int l = 4;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(l);
  Eigen::VectorXd neighbor = Eigen::VectorXd::Ones(l);
  Eigen::ArrayXd mask = Eigen::ArrayXd::Zero(l);
  mask[1] = 1.0;
  DataBlock blk;
  blk.inputs = Eigen::MatrixXd::Zero(1, l);
  blk.desired = Eigen::VectorXd::Zero(1);
  std::vector<CouplingTerm> coupling{{1.0, &neighbor, &mask}};
  const auto psi = adapt_step(w, blk, 0.5, 0.2, 1e-5, coupling);
  // Only the masked coordinate moves: mu * eta * rho * (w_l - w)_1.
  CHECK(psi[0] == 0.0);
  CHECK(psi[1] == doctest::Approx(0.1));
  CHECK(psi[2] == 0.0);
}

TEST_CASE("combination reduces to the plain average under full masks") {
  const int l = 5;
  auto rng = make_stream(5, StreamTag::selftest);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd own(l), other(l);
  for (int i = 0; i < l; ++i) {
    own[i] = gauss(rng);
    other[i] = gauss(rng);
  }
  Eigen::ArrayXd ones = Eigen::ArrayXd::Ones(l);
  std::vector<CombineTerm> with_mask{{0.4, &other, &ones}};
  std::vector<CombineTerm> no_mask{{0.4, &other, nullptr}};
  const auto a = combine_step(own, with_mask);
  const auto b = combine_step(own, no_mask);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a - (0.6 * own + 0.4 * other)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("combination with empty masks keeps the own intermediate exactly") {
  const int l = 5;
  Eigen::VectorXd own = Eigen::VectorXd::LinSpaced(l, 1.0, 2.0);
  Eigen::VectorXd other = Eigen::VectorXd::Constant(l, -3.0);
  Eigen::ArrayXd zeros = Eigen::ArrayXd::Zero(l);
  std::vector<CombineTerm> terms{{0.4, &other, &zeros}};
  const auto out = combine_step(own, terms);
  CHECK((out - own).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("partial masks substitute only the unsent entries") {
  const int l = 3;
  Eigen::VectorXd own(l), other(l);
  own << 1.0, 2.0, 3.0;
  other << 5.0, 7.0, 9.0;
  Eigen::ArrayXd mask = Eigen::ArrayXd::Zero(l);
  mask[1] = 1.0;
  std::vector<CombineTerm> terms{{0.5, &other, &mask}};
  const auto out = combine_step(own, terms);
  CHECK(out[0] == 1.0);
  CHECK(out[1] == doctest::Approx(0.5 * 2.0 + 0.5 * 7.0));
  CHECK(out[2] == 3.0);
}

TEST_CASE("self combination ignores neighbors entirely") {
  const int l = 3;
  Eigen::VectorXd own = Eigen::VectorXd::Ones(l);
  Eigen::VectorXd other = Eigen::VectorXd::Constant(l, 9.0);
  Eigen::ArrayXd half = Eigen::ArrayXd::Zero(l);
  half[0] = 1.0;
  std::vector<CombineTerm> terms{{0.0, &other, &half}};
  const auto out = combine_step(own, terms);
  CHECK((out - own).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("full-mask partial diffusion matches algorithm one bit for bit") {
  auto cfg = mesh_config();
  const auto setup = build_setup(cfg);
  const int n = setup.topology.node_count;
  const int l = cfg.filter_length;

  auto make_sources = [&]() {
    std::vector<NodeSource> s;
    for (int k = 0; k < n; ++k) {
      s.emplace_back(setup.signals[k], l, cfg.block_rows, setup.optimum.node_optimum[k],
                     make_stream(cfg.seed, StreamTag::regressor, 0, k),
                     make_stream(cfg.seed, StreamTag::noise, 0, k));
    }
    return s;
  };

  Network partial(setup.topology, setup.weights, l, cfg.block_rows,
                  DiffusionMode::partial);
  Network full(setup.topology, setup.weights, l, cfg.block_rows, DiffusionMode::full);
  auto sa = make_sources();
  auto sb = make_sources();
  std::vector<Eigen::ArrayXd> ones(n, Eigen::ArrayXd::Ones(l));
  std::vector<Eigen::ArrayXd> none;
  std::vector<DataBlock> blocks(n);
  for (int iter = 0; iter < 300; ++iter) {
    for (int k = 0; k < n; ++k) {
      sa[k].advance();
      blocks[k] = sa[k].block();
    }
    partial.step(blocks, ones);
    for (int k = 0; k < n; ++k) {
      sb[k].advance();
      blocks[k] = sb[k].block();
    }
    full.step(blocks, none);
    for (int k = 0; k < n; ++k) {
      CHECK((partial.estimate(k) - full.estimate(k)).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("zero-mask partial diffusion equals independent filters") {
  auto cfg = mesh_config();
  cfg.coupling_strength = 0.05;  // arbitrary eta; masks kill the coupling
  const auto setup = build_setup(cfg);
  const int n = setup.topology.node_count;
  const int l = cfg.filter_length;

  Network isolated(setup.topology, setup.weights, l, cfg.block_rows,
                   DiffusionMode::partial);
  std::vector<NodeSource> sa, sb;
  for (int k = 0; k < n; ++k) {
    sa.emplace_back(setup.signals[k], l, cfg.block_rows, setup.optimum.node_optimum[k],
                    make_stream(cfg.seed, StreamTag::regressor, 0, k),
                    make_stream(cfg.seed, StreamTag::noise, 0, k));
    sb.emplace_back(setup.signals[k], l, cfg.block_rows, setup.optimum.node_optimum[k],
                    make_stream(cfg.seed, StreamTag::regressor, 0, k),
                    make_stream(cfg.seed, StreamTag::noise, 0, k));
  }
  std::vector<Eigen::VectorXd> solo(n, Eigen::VectorXd::Zero(l));
  std::vector<Eigen::ArrayXd> zeros(n, Eigen::ArrayXd::Zero(l));
  std::vector<DataBlock> blocks(n);
  double worst = 0.0;
  for (int iter = 0; iter < 300; ++iter) {
    for (int k = 0; k < n; ++k) {
      sa[k].advance();
      blocks[k] = sa[k].block();
    }
    isolated.step(blocks, zeros);
    for (int k = 0; k < n; ++k) {
      sb[k].advance();
      solo[k] = adapt_step(solo[k], sb[k].block(), setup.weights.step_size[k], 0.0,
                           setup.weights.epsilon, {});
      worst = std::max(worst,
                       (isolated.estimate(k) - solo[k]).cwiseAbs().maxCoeff());
    }
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("single node network runs standalone") {
  ExperimentConfig cfg;
  cfg.adjacency = {{true}};
  cfg.cluster_of = {0};
  cfg.filter_length = 4;
  cfg.block_rows = 2;
  cfg.shared_entries = 2;
  cfg.step_sizes = {0.5};
  cfg.iterations = 50;
  cfg.runs = 1;
  cfg.seed = 5;
  const auto setup = build_setup(cfg);
  Network net(setup.topology, setup.weights, 4, 2, DiffusionMode::partial);
  NodeSource src(setup.signals[0], 4, 2, setup.optimum.node_optimum[0],
                 make_stream(5, StreamTag::regressor, 0, 0),
                 make_stream(5, StreamTag::noise, 0, 0));
  std::vector<DataBlock> blocks(1);
  std::vector<Eigen::ArrayXd> masks(1, Eigen::ArrayXd::Ones(4));
  for (int i = 0; i < 50; ++i) {
    src.advance();
    blocks[0] = src.block();
    net.step(blocks, masks);
  }
  CHECK((net.estimate(0) - setup.optimum.node_optimum[0]).norm() <
        setup.optimum.node_optimum[0].norm());
}

TEST_CASE("noise-free common optimum is recovered to high accuracy") {
  // Single cluster, zero observation noise, mu inside (0, 2).
  ExperimentConfig cfg;
  cfg.adjacency = {
      {true, true, false, true},
      {true, true, true, false},
      {false, true, true, true},
      {true, false, true, true},
  };
  cfg.cluster_of = {0, 0, 0, 0};
  cfg.filter_length = 8;
  cfg.block_rows = 2;
  cfg.shared_entries = 4;
  cfg.scheme = SelectionScheme::uncoordinated;
  cfg.step_sizes = {0.8};
  cfg.coupling_strength = 0.0;
  cfg.epsilon = 1e-6;
  cfg.noise_vars = {1e-300};  // effectively noiseless
  cfg.deltas = {0.0};
  cfg.seed = 21;
  cfg.iterations = 5000;
  cfg.runs = 1;
  const auto setup = build_setup(cfg);

  const int n = 4;
  std::vector<NodeSource> sources;
  for (int k = 0; k < n; ++k) {
    sources.emplace_back(setup.signals[k], 8, 2, setup.optimum.node_optimum[k],
                         make_stream(21, StreamTag::regressor, 0, k),
                         make_stream(21, StreamTag::noise, 0, k));
  }
  SelectionConfig sel{cfg.scheme, cfg.shared_entries, cfg.filter_length};
  MaskSource mask_source(sel, n, cfg.seed, 0);
  Network net(setup.topology, setup.weights, 8, 2, DiffusionMode::partial);
  std::vector<DataBlock> blocks(n);
  std::vector<Eigen::ArrayXd> masks;
  for (int i = 0; i < 5000; ++i) {
    for (int k = 0; k < n; ++k) {
      sources[k].advance();
      blocks[k] = sources[k].block();
    }
    mask_source.next(masks);
    net.step(blocks, masks);
  }
  for (int k = 0; k < n; ++k) {
    CHECK((net.estimate(k) - setup.optimum.node_optimum[k]).norm() < 1e-8);
  }
}

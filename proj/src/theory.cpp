#include "theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "blockalg.hpp"
#include "rng.hpp"

namespace pdapa {

namespace {

constexpr std::uint64_t kMomentSeedOffset = 0x7d0f3a52u;  // documented fixed offset

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Eigen::MatrixXd expand_to_taps(const Eigen::MatrixXd& node_matrix, int filter_length) {
  return kron(node_matrix, Eigen::MatrixXd::Identity(filter_length, filter_length));
}

// One matrix entry of the combination/coupling operators as an affine
// function of the mask bits of the sending nodes at one tap.
struct AffineEntry {
  Eigen::Index row = 0;  // global NL index; row and col share the tap
  Eigen::Index col = 0;
  int tap = 0;
  double constant = 0.0;
  std::vector<std::pair<int, double>> mask_terms;  // (sending node, coefficient)
};

std::vector<AffineEntry> combine_entries(const GlobalModel& m) {
  std::vector<AffineEntry> entries;
  const int l = m.filter_length;
  for (int i = 0; i < m.node_count; ++i) {
    for (int r = 0; r < l; ++r) {
      AffineEntry diag;
      diag.row = diag.col = static_cast<Eigen::Index>(i) * l + r;
      diag.tap = r;
      diag.constant = 1.0;
      for (int nb : m.topology.cluster_neighbors[i]) {
        if (nb == i) continue;
        diag.mask_terms.emplace_back(nb, -m.combine(nb, i));
      }
      entries.push_back(std::move(diag));
      for (int nb : m.topology.cluster_neighbors[i]) {
        if (nb == i) continue;
        AffineEntry off;
        off.row = static_cast<Eigen::Index>(i) * l + r;
        off.col = static_cast<Eigen::Index>(nb) * l + r;
        off.tap = r;
        off.mask_terms.emplace_back(nb, m.combine(nb, i));
        entries.push_back(std::move(off));
      }
    }
  }
  return entries;
}

std::vector<AffineEntry> coupling_entries(const GlobalModel& m) {
  std::vector<AffineEntry> entries;
  const int l = m.filter_length;
  for (int i = 0; i < m.node_count; ++i) {
    if (m.topology.foreign_neighbors[i].empty()) continue;
    for (int r = 0; r < l; ++r) {
      AffineEntry diag;
      diag.row = diag.col = static_cast<Eigen::Index>(i) * l + r;
      diag.tap = r;
      for (int nb : m.topology.foreign_neighbors[i]) {
        diag.mask_terms.emplace_back(nb, -m.regularize(i, nb));
      }
      entries.push_back(std::move(diag));
      for (int nb : m.topology.foreign_neighbors[i]) {
        AffineEntry off;
        off.row = static_cast<Eigen::Index>(i) * l + r;
        off.col = static_cast<Eigen::Index>(nb) * l + r;
        off.tap = r;
        off.mask_terms.emplace_back(nb, m.regularize(i, nb));
        entries.push_back(std::move(off));
      }
    }
  }
  return entries;
}

// E[X kron_b X] (or the transposed variant) over the mask distribution for a
// matrix X whose entries are the given affine forms. Every entry pair expands
// into first and second mask moments from the scheme's cross-moment table.
Eigen::MatrixXd mask_second_moment(const GlobalModel& m,
                                   const std::vector<AffineEntry>& entries,
                                   bool transposed) {
  const Eigen::Index nl = m.dim();
  const Eigen::Index blocks = m.node_count;
  const Eigen::Index l = m.filter_length;
  const double p = m.transmit_probability;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(nl * nl, nl * nl);
  for (const auto& ea : entries) {
    for (const auto& eb : entries) {
      double value = ea.constant * eb.constant;
      if (p > 0.0) {
        double acc = 0.0;
        for (const auto& [node_a, coeff_a] : ea.mask_terms) acc += coeff_a;
        value += eb.constant * p * acc;
        acc = 0.0;
        for (const auto& [node_b, coeff_b] : eb.mask_terms) acc += coeff_b;
        value += ea.constant * p * acc;
        for (const auto& [node_a, coeff_a] : ea.mask_terms) {
          for (const auto& [node_b, coeff_b] : eb.mask_terms) {
            value += coeff_a * coeff_b *
                     cross_moment(m.scheme, m.shared_entries, m.filter_length,
                                  node_a == node_b, ea.tap == eb.tap);
          }
        }
      }
      Eigen::Index row_pos, col_pos;
      if (transposed) {
        row_pos = bvec_index(ea.col, eb.col, l, blocks);
        col_pos = bvec_index(ea.row, eb.row, l, blocks);
      } else {
        row_pos = bvec_index(ea.row, eb.row, l, blocks);
        col_pos = bvec_index(ea.col, eb.col, l, blocks);
      }
      out(row_pos, col_pos) = value;
    }
  }
  return out;
}

// Column (right) scaling by the diagonal of d1 kron_b d2.
void scale_columns(Eigen::MatrixXd& m, const Eigen::VectorXd& d1,
                   const Eigen::VectorXd& d2, Eigen::Index l, Eigen::Index blocks) {
  const Eigen::Index nl = d1.size();
  for (Eigen::Index jcol = 0; jcol < nl; ++jcol) {
    for (Eigen::Index icol = 0; icol < nl; ++icol) {
      m.col(bvec_index(icol, jcol, l, blocks)) *= d1[icol] * d2[jcol];
    }
  }
}

void scale_rows(Eigen::MatrixXd& m, const Eigen::VectorXd& d1,
                const Eigen::VectorXd& d2, Eigen::Index l, Eigen::Index blocks) {
  const Eigen::Index nl = d1.size();
  for (Eigen::Index jrow = 0; jrow < nl; ++jrow) {
    for (Eigen::Index irow = 0; irow < nl; ++irow) {
      m.row(bvec_index(irow, jrow, l, blocks)) *= d1[irow] * d2[jrow];
    }
  }
}

Eigen::MatrixXd block_diag(const std::vector<Eigen::MatrixXd>& blocks) {
  Eigen::Index dim = 0;
  for (const auto& b : blocks) dim += b.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    out.block(at, at, b.rows(), b.cols()) = b;
    at += b.rows();
  }
  return out;
}

}  // namespace

NodeDataMoments estimate_node_moments(const NodeSignalModel& model, int filter_length,
                                      int block_rows, double epsilon, int samples,
                                      std::mt19937_64& rng) {
  model.validate();
  if (samples < 1) throw std::invalid_argument("theory: samples must be >= 1");
  const int l = filter_length;
  const int p = block_rows;
  const int window = l + p - 1;
  const double a = model.ar_coeff;
  const double innovation_std = std::sqrt(model.input_var * (1.0 - a * a));
  const double stationary_std = std::sqrt(model.input_var);
  std::normal_distribution<double> gauss(0.0, 1.0);

  NodeDataMoments acc;
  acc.projection_mean = Eigen::MatrixXd::Zero(l, l);
  acc.projection_kron = Eigen::MatrixXd::Zero(l * l, l * l);
  acc.gain_gram = Eigen::MatrixXd::Zero(l, l);

  Eigen::VectorXd stream(window);
  Eigen::MatrixXd inputs(p, l);
  for (int s = 0; s < samples; ++s) {
    // Exact stationary AR(1) window: seed from the stationary marginal and
    // run the recursion forward; newest sample ends up at index 0.
    stream[window - 1] = stationary_std * gauss(rng);
    for (int t = window - 2; t >= 0; --t) {
      stream[t] = a * stream[t + 1] + innovation_std * gauss(rng);
    }
    for (int row = 0; row < p; ++row) {
      inputs.row(row) = stream.segment(row, l);
    }
    Eigen::MatrixXd gram = inputs * inputs.transpose();
    gram.diagonal().array() += epsilon;
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    const Eigen::MatrixXd gain = llt.solve(inputs);            // W_k
    const Eigen::MatrixXd projection = inputs.transpose() * gain;  // Z_k
    acc.projection_mean += projection;
    acc.gain_gram += gain.transpose() * gain;
    acc.projection_kron += kron(projection, projection);
  }
  acc.projection_mean /= samples;
  acc.projection_kron /= samples;
  acc.gain_gram /= samples;
  return acc;
}

GlobalModel build_global_model(const Topology& top, const WeightMatrices& weights,
                               const std::vector<NodeSignalModel>& signals,
                               SelectionScheme scheme, int shared_entries,
                               int block_rows, const Eigen::VectorXd& stacked_optimum,
                               const TheorySettings& settings) {
  weights.validate(top);
  if (static_cast<int>(signals.size()) != top.node_count) {
    throw std::invalid_argument("theory: one signal model per node required");
  }
  GlobalModel m;
  m.node_count = top.node_count;
  m.block_rows = block_rows;
  m.scheme = scheme;
  m.shared_entries = shared_entries;
  m.topology = top;
  m.combine = weights.combine;
  m.regularize = weights.regularize;
  m.step_size = weights.step_size;
  m.coupling_strength = weights.coupling_strength;
  m.epsilon = weights.epsilon;
  m.signals = signals;
  m.optimum = stacked_optimum;

  if (stacked_optimum.size() % top.node_count != 0) {
    throw std::invalid_argument("theory: stacked optimum size not divisible by N");
  }
  m.filter_length = static_cast<int>(stacked_optimum.size()) / top.node_count;
  if (shared_entries < 0 || shared_entries > m.filter_length) {
    throw std::invalid_argument("theory: M must lie in [0, L]");
  }
  m.transmit_probability = static_cast<double>(shared_entries) / m.filter_length;

  const Eigen::Index nl = m.dim();
  if (nl > settings.dimension_cap) {
    throw CapacityError("theory: N*L = " + std::to_string(nl) +
                        " exceeds the configured cap of " +
                        std::to_string(settings.dimension_cap));
  }

  m.combine_expanded = expand_to_taps(m.combine, m.filter_length);
  m.regularize_expanded = expand_to_taps(m.regularize, m.filter_length);
  m.coupling_graph = m.regularize_expanded - Eigen::MatrixXd::Identity(nl, nl);
  m.mean_coupling = m.transmit_probability * m.coupling_graph;
  m.mean_combine = m.transmit_probability * m.combine_expanded.transpose() +
                   (1.0 - m.transmit_probability) * Eigen::MatrixXd::Identity(nl, nl);

  m.step_diag.resize(nl);
  m.coupling_diag.resize(nl);
  for (int k = 0; k < m.node_count; ++k) {
    m.step_diag.segment(static_cast<Eigen::Index>(k) * m.filter_length, m.filter_length)
        .setConstant(m.step_size[k]);
    m.coupling_diag.segment(static_cast<Eigen::Index>(k) * m.filter_length, m.filter_length)
        .setConstant(m.coupling_strength[k]);
  }

  m.projection_mean_node.resize(m.node_count);
  m.projection_kron_node.resize(m.node_count);
  m.gain_gram_node.resize(m.node_count);
  for (int k = 0; k < m.node_count; ++k) {
    auto rng = make_stream(settings.seed + kMomentSeedOffset, StreamTag::moment_estimator,
                           static_cast<std::uint64_t>(k));
    auto moments = estimate_node_moments(signals[k], m.filter_length, block_rows,
                                         m.epsilon, settings.samples, rng);
    m.projection_mean_node[k] = std::move(moments.projection_mean);
    m.projection_kron_node[k] = std::move(moments.projection_kron);
    m.gain_gram_node[k] = std::move(moments.gain_gram);
  }
  m.projection_mean = block_diag(m.projection_mean_node);
  return m;
}

double mean_step_bound(const std::vector<Eigen::MatrixXd>& projection_mean_node,
                       double coupling_strength, double transmit_probability) {
  double top = 0.0;
  for (const auto& z : projection_mean_node) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (z + z.transpose()));
    top = std::max(top, es.eigenvalues().maxCoeff());
  }
  return 2.0 / (top + 2.0 * coupling_strength * transmit_probability);
}

double mean_step_bound(const GlobalModel& model) {
  return mean_step_bound(model.projection_mean_node, model.coupling_strength.maxCoeff(),
                         model.transmit_probability);
}

double spectral_radius(const Eigen::MatrixXd& m) {
  if (m.rows() <= 600) {
    return Eigen::EigenSolver<Eigen::MatrixXd>(m, false).eigenvalues().cwiseAbs().maxCoeff();
  }
  // Power iteration with a deterministic start for large operators.
  Eigen::VectorXd v = Eigen::VectorXd::Ones(m.rows()).normalized();
  double rho = 0.0;
  for (int it = 0; it < 300; ++it) {
    Eigen::VectorXd w = m * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    rho = norm;
  }
  return rho;
}

MeanPrediction mean_recursion(const GlobalModel& model, int steps) {
  const Eigen::Index nl = model.dim();
  MeanPrediction out;
  const Eigen::MatrixXd core =
      Eigen::MatrixXd::Identity(nl, nl) -
      model.step_diag.asDiagonal() * model.projection_mean +
      model.step_diag.asDiagonal() *
          (model.coupling_diag.asDiagonal() * model.mean_coupling);
  out.transition = model.mean_combine * core;
  out.driving = -model.mean_combine * (model.step_diag.asDiagonal() *
                                       (model.coupling_diag.asDiagonal() *
                                        (model.mean_coupling * model.optimum)));
  out.spectral_radius = spectral_radius(out.transition);
  out.stable = out.spectral_radius < 1.0;

  Eigen::VectorXd err = model.optimum;  // w(0) = 0
  out.trajectory.reserve(steps + 1);
  out.trajectory.push_back(err);
  for (int n = 0; n < steps; ++n) {
    err = out.transition * err + out.driving;
    out.trajectory.push_back(err);
  }
  if (out.stable) {
    out.asymptotic_bias = (Eigen::MatrixXd::Identity(nl, nl) - out.transition)
                              .partialPivLu()
                              .solve(out.driving);
  } else {
    out.asymptotic_bias = Eigen::VectorXd::Constant(nl,
                                                    std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

Eigen::MatrixXd combine_second_moment_assembled(const GlobalModel& model, bool transposed) {
  return mask_second_moment(model, combine_entries(model), transposed);
}

Eigen::MatrixXd coupling_second_moment_assembled(const GlobalModel& model, bool transposed) {
  return mask_second_moment(model, coupling_entries(model), transposed);
}

Eigen::MatrixXd combine_second_moment_closed(const GlobalModel& model, bool transposed) {
  const Eigen::Index nl = model.dim();
  const double p = model.transmit_probability;
  // Mixture form: with probability p the full combination applies, otherwise
  // every node keeps its own intermediate.
  Eigen::MatrixXd full = transposed
                             ? model.combine_expanded
                             : model.combine_expanded.transpose();
  return (1.0 - p) * Eigen::MatrixXd::Identity(nl * nl, nl * nl) +
         p * block_kron(full, full, model.filter_length);
}

Eigen::MatrixXd coupling_second_moment_closed(const GlobalModel& model, bool transposed) {
  const double p = model.transmit_probability;
  Eigen::MatrixXd graph = transposed ? model.coupling_graph.transpose()
                                     : model.coupling_graph;
  return p * block_kron(graph, graph, model.filter_length);
}

Eigen::MatrixXd combine_second_moment(const GlobalModel& model, bool transposed) {
  return model.scheme == SelectionScheme::periodic
             ? combine_second_moment_closed(model, transposed)
             : combine_second_moment_assembled(model, transposed);
}

Eigen::MatrixXd coupling_second_moment(const GlobalModel& model, bool transposed) {
  return model.scheme == SelectionScheme::periodic
             ? coupling_second_moment_closed(model, transposed)
             : coupling_second_moment_assembled(model, transposed);
}

Eigen::MatrixXd projection_second_moment(const GlobalModel& model) {
  const Eigen::Index nl = model.dim();
  const Eigen::Index l = model.filter_length;
  const Eigen::Index n = model.node_count;
  const Eigen::Index ll = l * l;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(nl * nl, nl * nl);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index at = (j * n + i) * ll;
      if (i == j) {
        out.block(at, at, ll, ll) = model.projection_kron_node[i];
      } else {
        out.block(at, at, ll, ll) =
            kron(model.projection_mean_node[j], model.projection_mean_node[i]);
      }
    }
  }
  return out;
}

Eigen::MatrixXd build_variance_transition(const GlobalModel& model) {
  const Eigen::Index nl = model.dim();
  const Eigen::Index l = model.filter_length;
  const Eigen::Index blocks = model.node_count;
  const Eigen::Index big = nl * nl;
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(nl, nl);

  const Eigen::VectorXd step_coupling_diag =
      model.step_diag.cwiseProduct(model.coupling_diag);
  const Eigen::MatrixXd step_proj =
      model.projection_mean * model.step_diag.asDiagonal();  // Zbar D
  const Eigen::MatrixXd coupling_step =
      model.mean_coupling.transpose() * step_coupling_diag.asDiagonal();

  Eigen::MatrixXd bracket = Eigen::MatrixXd::Identity(big, big);
  bracket -= block_kron(step_proj, identity, l);
  bracket -= block_kron(identity, step_proj, l);
  {
    Eigen::MatrixXd data_term = projection_second_moment(model);
    scale_columns(data_term, model.step_diag, model.step_diag, l, blocks);
    bracket += data_term;
  }
  const bool coupled = model.transmit_probability > 0.0 &&
                       (model.coupling_diag.array() != 0.0).any();
  if (coupled) {
    bracket += block_kron(coupling_step, identity, l);
    bracket += block_kron(identity, coupling_step, l);
    bracket -= block_kron(coupling_step, step_proj, l);
    bracket -= block_kron(step_proj, coupling_step, l);
    Eigen::MatrixXd coupling_kron = coupling_second_moment(model, true);
    scale_columns(coupling_kron, step_coupling_diag, step_coupling_diag, l, blocks);
    bracket += coupling_kron;
  }
  return bracket * combine_second_moment(model, true);
}

Eigen::VectorXd noise_vector(const GlobalModel& model) {
  const Eigen::Index l = model.filter_length;
  // D * blockdiag(noise_var_k * E[W_k^T W_k]) * D, then pushed through the
  // combination second moment.
  std::vector<Eigen::MatrixXd> blocks(model.node_count);
  for (int k = 0; k < model.node_count; ++k) {
    const double scale = model.signals[k].noise_var * model.step_size[k] * model.step_size[k];
    blocks[k] = scale * model.gain_gram_node[k];
  }
  const Eigen::VectorXd stacked = bvec(block_diag(blocks), l);
  return combine_second_moment(model, false) * stacked;
}

VarianceModel build_variance_model(const GlobalModel& model) {
  const Eigen::Index nl = model.dim();
  const Eigen::Index l = model.filter_length;
  const Eigen::Index blocks = model.node_count;
  const Eigen::Index big = nl * nl;

  VarianceModel var;
  var.transition = build_variance_transition(model);
  var.spectral_radius = spectral_radius(var.transition);
  var.stable = var.spectral_radius < 1.0;
  var.noise_energy = noise_vector(model);

  var.has_bias_terms = model.transmit_probability > 0.0 &&
                       (model.coupling_diag.array() != 0.0).any();
  if (!var.has_bias_terms) {
    var.bias_energy = Eigen::VectorXd::Zero(big);
    var.bias_cross_a = Eigen::MatrixXd::Zero(0, 0);
    var.bias_cross_b = Eigen::MatrixXd::Zero(0, 0);
    return var;
  }

  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(nl, nl);
  const Eigen::VectorXd step_coupling_diag =
      model.step_diag.cwiseProduct(model.coupling_diag);
  const Eigen::MatrixXd combine_kron = combine_second_moment(model, false);
  Eigen::MatrixXd coupling_kron = coupling_second_moment(model, false);
  scale_rows(coupling_kron, step_coupling_diag, step_coupling_diag, l, blocks);

  // r_b from the optimum outer product.
  const Eigen::MatrixXd optimum_outer = model.optimum * model.optimum.transpose();
  var.bias_energy = combine_kron * (coupling_kron * bvec(optimum_outer, l));

  const Eigen::MatrixXd step_proj =
      model.step_diag.asDiagonal() * model.projection_mean;  // D Zbar
  const Eigen::MatrixXd pull = model.step_diag.asDiagonal() *
                               (model.coupling_diag.asDiagonal() *
                                model.mean_coupling);  // D eta Qbar

  Eigen::MatrixXd bracket_a = block_kron(identity, pull, l);
  bracket_a -= block_kron(step_proj, pull, l);
  bracket_a += coupling_kron;
  var.bias_cross_a = combine_kron * bracket_a;

  Eigen::MatrixXd bracket_b = block_kron(pull, identity, l);
  bracket_b -= block_kron(pull, step_proj, l);
  bracket_b += coupling_kron;
  var.bias_cross_b = combine_kron * bracket_b;
  return var;
}

BiasTerms bias_terms(const GlobalModel& model, const VarianceModel& var,
                     const Eigen::VectorXd& mean_error) {
  const Eigen::Index l = model.filter_length;
  const Eigen::Index big = model.dim() * model.dim();
  BiasTerms out;
  if (!var.has_bias_terms) {
    out.bias_energy = Eigen::VectorXd::Zero(big);
    out.alpha1 = Eigen::VectorXd::Zero(big);
    out.alpha2 = Eigen::VectorXd::Zero(big);
    return out;
  }
  out.bias_energy = var.bias_energy;
  out.alpha1 = var.bias_cross_a * bvec(model.optimum * mean_error.transpose(), l);
  out.alpha2 = var.bias_cross_b * bvec(mean_error * model.optimum.transpose(), l);
  return out;
}

Eigen::VectorXd uniform_weighting(int node_count, int filter_length) {
  const Eigen::Index nl = static_cast<Eigen::Index>(node_count) * filter_length;
  return bvec(Eigen::MatrixXd::Identity(nl, nl) / node_count, filter_length);
}

Eigen::VectorXd normalized_weighting(const std::vector<Eigen::VectorXd>& node_optima) {
  const auto n = static_cast<Eigen::Index>(node_optima.size());
  const auto l = node_optima.front().size();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n * l, n * l);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double norm2 = node_optima[k].squaredNorm();
    w.block(k * l, k * l, l, l) =
        Eigen::MatrixXd::Identity(l, l) / (static_cast<double>(n) * norm2);
  }
  return bvec(w, l);
}

std::vector<double> transient_msd(const GlobalModel& model, const VarianceModel& var,
                                  int iterations, const Eigen::VectorXd& weighting) {
  if (!var.stable) {
    throw InstabilityError("theory: variance recursion is unstable (spectral radius " +
                           std::to_string(var.spectral_radius) + ")");
  }
  const Eigen::Index l = model.filter_length;
  const Eigen::Index big = model.dim() * model.dim();
  const Eigen::VectorXd initial_outer = bvec(model.optimum * model.optimum.transpose(), l);

  MeanPrediction mean = mean_recursion(model, 0);
  Eigen::VectorXd mean_error = model.optimum;

  std::vector<double> out;
  out.reserve(iterations);
  double msd = initial_outer.dot(weighting);
  out.push_back(msd);

  Eigen::VectorXd phi = weighting;            // F^n sigma
  Eigen::VectorXd gamma_acc = Eigen::VectorXd::Zero(big);  // running Gamma(n)

  for (int n = 1; n < iterations; ++n) {
    Eigen::VectorXd phi_next = var.transition * phi;
    double delta = var.noise_energy.dot(phi) - (initial_outer.dot(phi) - initial_outer.dot(phi_next));
    if (var.has_bias_terms) {
      const BiasTerms bias = bias_terms(model, var, mean_error);
      const Eigen::VectorXd beta = bias.alpha1 + bias.alpha2;
      delta += bias.bias_energy.dot(phi);
      delta -= beta.dot(weighting) + gamma_acc.dot(weighting);
      // Gamma(n+1) = (Gamma(n) + beta(n)) F - beta(n)
      gamma_acc = var.transition.transpose() * (gamma_acc + beta) - beta;
      mean_error = mean.transition * mean_error + mean.driving;
    }
    msd += delta;
    out.push_back(msd);
    phi.swap(phi_next);
  }
  return out;
}

double steady_state_msd(const GlobalModel& model, const VarianceModel& var,
                        const Eigen::VectorXd& weighting) {
  if (!var.stable) {
    throw InstabilityError("theory: variance recursion is unstable (spectral radius " +
                           std::to_string(var.spectral_radius) + ")");
  }
  const Eigen::Index big = model.dim() * model.dim();
  Eigen::VectorXd rhs = var.noise_energy;
  if (var.has_bias_terms) {
    MeanPrediction mean = mean_recursion(model, 0);
    if (!mean.stable) {
      throw InstabilityError("theory: mean recursion is unstable");
    }
    const BiasTerms bias = bias_terms(model, var, mean.asymptotic_bias);
    rhs += bias.bias_energy - bias.alpha1 - bias.alpha2;
  }
  const Eigen::MatrixXd system =
      Eigen::MatrixXd::Identity(big, big) - var.transition;
  const Eigen::VectorXd solved = system.partialPivLu().solve(weighting);
  return rhs.dot(solved);
}

}  // namespace pdapa

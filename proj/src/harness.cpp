#include "harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "rng.hpp"

namespace pdapa {

namespace {

using nlohmann::json;

constexpr double kDivergenceClampLinear = 1e10;   // +100 dB
constexpr double kFloorClampLinear = 1e-32;       // -320 dB

std::vector<double> broadcast(const std::vector<double>& values, int count,
                              const char* what) {
  if (values.size() == 1) return std::vector<double>(count, values.front());
  if (static_cast<int>(values.size()) == count) return values;
  throw std::invalid_argument(std::string("setup: ") + what +
                              " needs 1 or one-per-node values");
}

struct RunResult {
  std::vector<double> nmsd_lin;
  std::vector<double> msd_lin;
  std::vector<std::vector<double>> node_nmsd_lin;
  Eigen::VectorXd final_estimate;
  bool diverged = false;
};

RunResult simulate_run(const ExperimentSetup& setup, int run_index) {
  const auto& cfg = setup.config;
  const int n = setup.topology.node_count;
  const int l = cfg.filter_length;
  const int t = cfg.iterations;

  std::vector<NodeSource> sources;
  sources.reserve(n);
  for (int k = 0; k < n; ++k) {
    sources.emplace_back(setup.signals[k], l, cfg.block_rows,
                         setup.optimum.node_optimum[k],
                         make_stream(cfg.seed, StreamTag::regressor,
                                     static_cast<std::uint64_t>(run_index), k),
                         make_stream(cfg.seed, StreamTag::noise,
                                     static_cast<std::uint64_t>(run_index), k));
  }
  SelectionConfig sel{cfg.scheme, cfg.shared_entries, l};
  MaskSource mask_source(sel, n, cfg.seed, static_cast<std::uint64_t>(run_index));
  Network net(setup.topology, setup.weights, l, cfg.block_rows, cfg.mode);

  std::vector<double> optimum_norm2(n);
  for (int k = 0; k < n; ++k) optimum_norm2[k] = setup.optimum.node_optimum[k].squaredNorm();

  RunResult res;
  res.nmsd_lin.resize(t);
  res.msd_lin.resize(t);
  if (cfg.per_node_curves) {
    res.node_nmsd_lin.assign(n, std::vector<double>(t, 0.0));
  }

  std::vector<DataBlock> blocks(n);
  std::vector<Eigen::ArrayXd> masks;
  for (int iter = 0; iter < t; ++iter) {
    double nmsd = 0.0;
    double msd = 0.0;
    for (int k = 0; k < n; ++k) {
      const double dev = (net.estimate(k) - setup.optimum.node_optimum[k]).squaredNorm();
      msd += dev;
      const double ratio = dev / optimum_norm2[k];
      nmsd += ratio;
      if (cfg.per_node_curves) res.node_nmsd_lin[k][iter] = ratio;
    }
    nmsd /= n;
    msd /= n;
    if (!std::isfinite(nmsd) || nmsd > kDivergenceClampLinear) {
      res.diverged = true;
      for (int rest = iter; rest < t; ++rest) {
        res.nmsd_lin[rest] = kDivergenceClampLinear;
        res.msd_lin[rest] = kDivergenceClampLinear;
        if (cfg.per_node_curves) {
          for (int k = 0; k < n; ++k) res.node_nmsd_lin[k][rest] = kDivergenceClampLinear;
        }
      }
      break;
    }
    res.nmsd_lin[iter] = nmsd;
    res.msd_lin[iter] = msd;

    if (iter == t - 1) break;
    for (auto& s : sources) s.advance();
    for (int k = 0; k < n; ++k) blocks[k] = sources[k].block();
    if (cfg.mode == DiffusionMode::partial) mask_source.next(masks);
    net.step(blocks, masks);
  }

  res.final_estimate.resize(static_cast<Eigen::Index>(n) * l);
  for (int k = 0; k < n; ++k) {
    res.final_estimate.segment(static_cast<Eigen::Index>(k) * l, l) = net.estimate(k);
  }
  return res;
}

double steady_mean_db(const std::vector<double>& linear) {
  const auto t = static_cast<int>(linear.size());
  const int window = std::max(1, t / 10);
  double acc = 0.0;
  for (int i = t - window; i < t; ++i) acc += linear[i];
  return to_db(acc / window);
}

void format_number(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  out += buf;
}

}  // namespace

double to_db(double linear) {
  const double clamped = std::clamp(linear, kFloorClampLinear, kDivergenceClampLinear);
  return 10.0 * std::log10(clamped);
}

ExperimentSetup build_setup(const ExperimentConfig& config) {
  ExperimentSetup setup;
  setup.config = config;
  setup.topology = build_topology(config.adjacency, config.cluster_of);
  const int n = setup.topology.node_count;

  if (config.filter_length < 1 || config.block_rows < 1) {
    throw std::invalid_argument("setup: L and P must be >= 1");
  }
  if (config.shared_entries < 0 || config.shared_entries > config.filter_length) {
    throw std::invalid_argument("setup: M must lie in [0, L]");
  }
  if (config.iterations < 1 || config.runs < 1) {
    throw std::invalid_argument("setup: iterations and runs must be >= 1");
  }
  if (config.jobs < 1) throw std::invalid_argument("setup: jobs must be >= 1");
  if (config.step_sizes.empty()) {
    throw std::invalid_argument("setup: step size (mu) is required");
  }

  setup.weights.combine = metropolis_weights(setup.topology);
  setup.weights.regularize = uniform_regularization(setup.topology);
  const auto mus = broadcast(config.step_sizes, n, "mu");
  setup.weights.step_size = Eigen::Map<const Eigen::VectorXd>(mus.data(), n);
  setup.weights.coupling_strength =
      Eigen::VectorXd::Constant(n, config.coupling_strength);
  setup.weights.epsilon = config.epsilon;
  setup.weights.validate(setup.topology);

  // Per-node statistics: drawn once from the experiment seed, then any
  // explicitly configured values override the drawn ones.
  auto profile_rng = make_stream(config.seed, StreamTag::signal_profile);
  setup.signals = draw_signal_models(n, profile_rng);
  if (!config.ar_coeffs.empty()) {
    const auto v = broadcast(config.ar_coeffs, n, "ar_coeff");
    for (int k = 0; k < n; ++k) setup.signals[k].ar_coeff = v[k];
  }
  if (!config.input_vars.empty()) {
    const auto v = broadcast(config.input_vars, n, "input_var");
    for (int k = 0; k < n; ++k) setup.signals[k].input_var = v[k];
  }
  if (!config.noise_vars.empty()) {
    const auto v = broadcast(config.noise_vars, n, "noise_var");
    for (int k = 0; k < n; ++k) setup.signals[k].noise_var = v[k];
  }
  for (const auto& s : setup.signals) s.validate();

  std::vector<double> deltas = config.deltas;
  if (deltas.empty()) {
    const double defaults[3] = {0.025, -0.025, 0.015};
    deltas.resize(setup.topology.cluster_count);
    for (int c = 0; c < setup.topology.cluster_count; ++c) deltas[c] = defaults[c % 3];
  }
  if (static_cast<int>(deltas.size()) != setup.topology.cluster_count) {
    throw std::invalid_argument("setup: need one delta per cluster");
  }
  auto optimum_rng = make_stream(config.seed, StreamTag::optimum);
  setup.optimum = make_optimal_weights(config.filter_length, setup.topology, deltas,
                                       optimum_rng);

  long links = 0;
  for (int k = 0; k < n; ++k) {
    links += static_cast<long>(setup.topology.cluster_neighbors[k].size()) - 1;
    links += static_cast<long>(setup.topology.foreign_neighbors[k].size());
  }
  const long per_link = config.mode == DiffusionMode::full ? config.filter_length
                                                           : config.shared_entries;
  setup.transmitted_entries_per_iteration = links * per_link;
  return setup;
}

LearningCurve run_experiment(const ExperimentSetup& setup) {
  const auto& cfg = setup.config;
  const int t = cfg.iterations;
  const int n = setup.topology.node_count;
  const int runs = cfg.runs;

  LearningCurve curve;
  curve.runs = runs;
  std::vector<double> nmsd_acc(t, 0.0);
  std::vector<double> msd_acc(t, 0.0);
  std::vector<std::vector<double>> node_acc;
  if (cfg.per_node_curves) node_acc.assign(n, std::vector<double>(t, 0.0));
  Eigen::VectorXd final_acc =
      Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n) * cfg.filter_length);
  int final_count = 0;

  auto reduce = [&](const RunResult& res) {
    for (int i = 0; i < t; ++i) {
      nmsd_acc[i] += res.nmsd_lin[i];
      msd_acc[i] += res.msd_lin[i];
    }
    if (cfg.per_node_curves) {
      for (int k = 0; k < n; ++k) {
        for (int i = 0; i < t; ++i) node_acc[k][i] += res.node_nmsd_lin[k][i];
      }
    }
    if (res.diverged) {
      ++curve.diverged_runs;
    } else {
      final_acc += res.final_estimate;
      ++final_count;
    }
  };

  const int jobs = std::min(cfg.jobs, runs);
  if (jobs <= 1) {
    for (int r = 0; r < runs; ++r) reduce(simulate_run(setup, r));
  } else {
    // Workers fill per-run slots; reduction happens afterwards in run order
    // so the averaged output does not depend on the job count.
    std::vector<RunResult> slots(runs);
    std::atomic<int> next{0};
    auto worker = [&]() {
      for (;;) {
        const int r = next.fetch_add(1);
        if (r >= runs) return;
        slots[r] = simulate_run(setup, r);
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    for (int r = 0; r < runs; ++r) reduce(slots[r]);
  }

  curve.nmsd_db.resize(t);
  curve.msd_db.resize(t);
  std::vector<double> nmsd_mean(t), msd_mean(t);
  for (int i = 0; i < t; ++i) {
    nmsd_mean[i] = nmsd_acc[i] / runs;
    msd_mean[i] = msd_acc[i] / runs;
    curve.nmsd_db[i] = to_db(nmsd_mean[i]);
    curve.msd_db[i] = to_db(msd_mean[i]);
  }
  if (cfg.per_node_curves) {
    curve.node_nmsd_db.assign(n, std::vector<double>(t, 0.0));
    for (int k = 0; k < n; ++k) {
      for (int i = 0; i < t; ++i) curve.node_nmsd_db[k][i] = to_db(node_acc[k][i] / runs);
    }
  }
  curve.steady_nmsd_db = steady_mean_db(nmsd_mean);
  curve.steady_msd_db = steady_mean_db(msd_mean);
  curve.mean_final_estimate =
      final_count > 0 ? Eigen::VectorXd(final_acc / final_count)
                      : Eigen::VectorXd::Zero(final_acc.size());
  return curve;
}

TheoryReport run_theory(const ExperimentSetup& setup) {
  const auto& cfg = setup.config;
  TheorySettings settings;
  settings.samples = cfg.theory_samples;
  settings.seed = cfg.seed;
  settings.dimension_cap = cfg.theory_cap;

  const GlobalModel model = build_global_model(
      setup.topology, setup.weights, setup.signals, cfg.scheme,
      cfg.mode == DiffusionMode::full ? cfg.filter_length : cfg.shared_entries,
      cfg.block_rows, setup.optimum.stacked(), settings);

  TheoryReport report;
  report.mu_max = mean_step_bound(model);

  const MeanPrediction mean = mean_recursion(model, 0);
  report.spectral_radius_mean = mean.spectral_radius;
  report.asymptotic_bias = mean.stable
                               ? mean.asymptotic_bias
                               : Eigen::VectorXd::Zero(model.dim());

  const VarianceModel var = build_variance_model(model);
  report.spectral_radius_variance = var.spectral_radius;
  report.stable = var.stable && mean.stable;
  if (!report.stable) {
    throw InstabilityError("theory: configuration is predicted unstable (mean " +
                           std::to_string(mean.spectral_radius) + ", variance " +
                           std::to_string(var.spectral_radius) + ")");
  }

  const Eigen::VectorXd uniform =
      uniform_weighting(model.node_count, model.filter_length);
  const Eigen::VectorXd normalized = normalized_weighting(setup.optimum.node_optimum);

  const auto msd = transient_msd(model, var, cfg.iterations, uniform);
  const auto nmsd = transient_msd(model, var, cfg.iterations, normalized);
  report.msd_db.resize(msd.size());
  report.nmsd_db.resize(nmsd.size());
  for (std::size_t i = 0; i < msd.size(); ++i) report.msd_db[i] = to_db(msd[i]);
  for (std::size_t i = 0; i < nmsd.size(); ++i) report.nmsd_db[i] = to_db(nmsd[i]);
  report.steady_msd_db = to_db(steady_state_msd(model, var, uniform));
  report.steady_nmsd_db = to_db(steady_state_msd(model, var, normalized));
  return report;
}

CompareReport compare_theory(const ExperimentSetup& setup) {
  CompareReport report;
  report.sim = run_experiment(setup);
  report.sim_diverged = report.sim.diverged_runs == report.sim.runs;
  try {
    report.theory = run_theory(setup);
  } catch (const CapacityError& e) {
    report.simulation_only = true;
    report.note = e.what();
    return report;
  } catch (const InstabilityError& e) {
    report.theory_unstable = true;
    report.note = e.what();
    return report;
  }

  report.steady_diff_db = report.sim.steady_nmsd_db - report.theory->steady_nmsd_db;
  double max_diff = 0.0;
  const int t = static_cast<int>(report.sim.nmsd_db.size());
  for (int i = report.tail_start; i < t; ++i) {
    max_diff = std::max(max_diff,
                        std::abs(report.sim.nmsd_db[i] - report.theory->nmsd_db[i]));
  }
  report.max_abs_diff_db_tail = max_diff;
  return report;
}

void write_curve_csv(const std::string& path, const LearningCurve& curve) {
  std::string out = "iter,nmsd_db";
  for (std::size_t k = 0; k < curve.node_nmsd_db.size(); ++k) {
    out += ",node_" + std::to_string(k + 1);
  }
  out += "\n";
  for (std::size_t i = 0; i < curve.nmsd_db.size(); ++i) {
    out += std::to_string(i);
    out += ',';
    format_number(out, curve.nmsd_db[i]);
    for (const auto& node : curve.node_nmsd_db) {
      out += ',';
      format_number(out, node[i]);
    }
    out += '\n';
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("io: cannot write " + path);
  file << out;
}

void write_optimum_txt(const std::string& path, const OptimalWeights& optimum) {
  std::string out;
  const auto taps = optimum.base.size();
  for (Eigen::Index r = 0; r < taps; ++r) {
    for (std::size_t k = 0; k < optimum.node_optimum.size(); ++k) {
      if (k > 0) out += ' ';
      format_number(out, optimum.node_optimum[k][r]);
    }
    out += '\n';
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("io: cannot write " + path);
  file << out;
}

void write_summary_json(const std::string& path, const ExperimentSetup& setup,
                        const LearningCurve& curve) {
  json j;
  j["iterations"] = setup.config.iterations;
  j["runs"] = curve.runs;
  j["diverged_runs"] = curve.diverged_runs;
  j["steady_nmsd_db"] = curve.steady_nmsd_db;
  j["steady_msd_db"] = curve.steady_msd_db;
  j["final_nmsd_db"] = curve.nmsd_db.empty() ? 0.0 : curve.nmsd_db.back();
  j["scheme"] = scheme_name(setup.config.scheme);
  j["mode"] = mode_name(setup.config.mode);
  j["L"] = setup.config.filter_length;
  j["P"] = setup.config.block_rows;
  j["M"] = setup.config.shared_entries;
  j["seed"] = setup.config.seed;
  j["transmitted_entries_per_iteration"] = setup.transmitted_entries_per_iteration;
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("io: cannot write " + path);
  file << j.dump(2) << "\n";
}

void write_theory_json(const std::string& path, const TheoryReport& report) {
  json j;
  j["mu_max"] = report.mu_max;
  j["spectral_radius_F"] = report.spectral_radius_variance;
  j["spectral_radius_mean"] = report.spectral_radius_mean;
  j["msd_transient"] = report.msd_db;
  j["msd_steady_db"] = report.steady_msd_db;
  j["nmsd_transient"] = report.nmsd_db;
  j["nmsd_steady_db"] = report.steady_nmsd_db;
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("io: cannot write " + path);
  file << j.dump(2) << "\n";
}

void write_compare_csv(const std::string& path, const CompareReport& report) {
  std::string out = "iter,sim_nmsd_db,theory_nmsd_db\n";
  const auto t = report.sim.nmsd_db.size();
  for (std::size_t i = 0; i < t; ++i) {
    out += std::to_string(i);
    out += ',';
    format_number(out, report.sim.nmsd_db[i]);
    out += ',';
    if (report.theory && i < report.theory->nmsd_db.size()) {
      format_number(out, report.theory->nmsd_db[i]);
    } else {
      out += "nan";
    }
    out += '\n';
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("io: cannot write " + path);
  file << out;
}

void write_compare_json(const std::string& path, const CompareReport& report) {
  json j;
  j["simulation_only"] = report.simulation_only;
  j["note"] = report.note;
  j["sim_steady_nmsd_db"] = report.sim.steady_nmsd_db;
  j["sim_diverged"] = report.sim_diverged;
  j["theory_unstable"] = report.theory_unstable;
  if (report.theory) {
    j["theory_steady_nmsd_db"] = report.theory->steady_nmsd_db;
    j["theory_steady_msd_db"] = report.theory->steady_msd_db;
    j["steady_diff_db"] = report.steady_diff_db;
    j["max_abs_diff_db_tail"] = report.max_abs_diff_db_tail;
    j["tail_start"] = report.tail_start;
    j["mu_max"] = report.theory->mu_max;
    j["spectral_radius_F"] = report.theory->spectral_radius_variance;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("io: cannot write " + path);
  file << j.dump(2) << "\n";
}

}  // namespace pdapa

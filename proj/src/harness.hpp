#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "adapt.hpp"
#include "selection.hpp"
#include "signal_model.hpp"
#include "theory.hpp"
#include "topology.hpp"

namespace pdapa {

// Parsed experiment description; see config.hpp for the file grammar.
struct ExperimentConfig {
  std::vector<std::vector<bool>> adjacency;
  std::vector<int> cluster_of;

  int filter_length = 16;
  int block_rows = 1;
  int shared_entries = 0;
  SelectionScheme scheme = SelectionScheme::uncoordinated;
  DiffusionMode mode = DiffusionMode::partial;
  std::vector<double> step_sizes;        // one value broadcasts to all nodes
  double coupling_strength = 0.0;
  double epsilon = 1e-5;

  // Empty entries are drawn from the documented default ranges at setup time.
  std::vector<double> ar_coeffs;
  std::vector<double> input_vars;
  std::vector<double> noise_vars;
  std::vector<double> deltas;            // per cluster; defaults cycle the paper's values

  int iterations = 5000;
  int runs = 50;
  std::uint64_t seed = 1;
  int jobs = 1;
  bool per_node_curves = false;
  bool dump_optimum = false;  // write the generated optima next to the curves
  int theory_samples = 20000;
  int theory_cap = 48;
};

// Fully materialized experiment: validated topology/weights, per-node signal
// models and the optimum vectors, all derived deterministically from the seed.
struct ExperimentSetup {
  ExperimentConfig config;
  Topology topology;
  WeightMatrices weights;
  std::vector<NodeSignalModel> signals;
  OptimalWeights optimum;
  long transmitted_entries_per_iteration = 0;
};

ExperimentSetup build_setup(const ExperimentConfig& config);

constexpr double kDivergenceClampDb = 100.0;
constexpr double kFloorClampDb = -320.0;

struct LearningCurve {
  std::vector<double> nmsd_db;   // averaged over runs, clamped to the dB window
  std::vector<double> msd_db;    // unnormalized network deviation, same averaging
  std::vector<std::vector<double>> node_nmsd_db;  // [node][iter] when requested
  int runs = 0;
  int diverged_runs = 0;
  double steady_nmsd_db = 0.0;   // energy mean of the last 10% of iterations
  double steady_msd_db = 0.0;
  Eigen::VectorXd mean_final_estimate;  // stacked, averaged over non-diverged runs
};

LearningCurve run_experiment(const ExperimentSetup& setup);

struct TheoryReport {
  double mu_max = 0.0;
  double spectral_radius_mean = 0.0;
  double spectral_radius_variance = 0.0;
  bool stable = false;
  std::vector<double> msd_db;       // uniform weighting (identity / N)
  double steady_msd_db = 0.0;
  std::vector<double> nmsd_db;      // per-node-normalized weighting
  double steady_nmsd_db = 0.0;
  Eigen::VectorXd asymptotic_bias;
};

// Analytical predictions over the same horizon as the simulation.
TheoryReport run_theory(const ExperimentSetup& setup);

struct CompareReport {
  LearningCurve sim;
  std::optional<TheoryReport> theory;
  bool simulation_only = false;        // theory cap exceeded
  std::string note;
  bool theory_unstable = false;
  bool sim_diverged = false;           // every run clamped
  double steady_diff_db = 0.0;         // sim - theory, normalized metric
  double max_abs_diff_db_tail = 0.0;   // over n >= tail_start
  int tail_start = 50;
};

CompareReport compare_theory(const ExperimentSetup& setup);

// File outputs. Numbers are printed with a fixed format so identical
// configurations produce byte-identical files.
void write_curve_csv(const std::string& path, const LearningCurve& curve);
// One column per node, one row per tap.
void write_optimum_txt(const std::string& path, const OptimalWeights& optimum);
void write_summary_json(const std::string& path, const ExperimentSetup& setup,
                        const LearningCurve& curve);
void write_theory_json(const std::string& path, const TheoryReport& report);
void write_compare_csv(const std::string& path, const CompareReport& report);
void write_compare_json(const std::string& path, const CompareReport& report);

double to_db(double linear);

}  // namespace pdapa

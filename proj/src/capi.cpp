#include "pdapa/pdapa.h"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include "config.hpp"
#include "harness.hpp"
#include "selftest.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& message) { g_last_error = message; }

enum class ResultKind { simulate, theory, compare };

}  // namespace

struct pdapa_experiment {
  pdapa::ExperimentConfig config;
};

struct pdapa_result {
  ResultKind kind;
  pdapa::ExperimentSetup setup;
  pdapa::LearningCurve curve;          // simulate
  pdapa::TheoryReport theory;          // theory
  pdapa::CompareReport compare;        // compare
  std::string summary;
  std::map<std::string, double> scalars;
  std::vector<double> curve_db;
};

namespace {

pdapa_status map_exception() {
  try {
    throw;
  } catch (const pdapa::ConfigError& e) {
    set_error(e.what());
    switch (e.kind()) {
      case pdapa::ConfigErrorKind::io: return PDAPA_ERR_CONFIG_NOT_FOUND;
      case pdapa::ConfigErrorKind::parse: return PDAPA_ERR_CONFIG_PARSE;
      case pdapa::ConfigErrorKind::semantic: return PDAPA_ERR_CONFIG_INVALID;
    }
    return PDAPA_ERR_CONFIG_INVALID;
  } catch (const pdapa::CapacityError& e) {
    set_error(e.what());
    return PDAPA_ERR_CAP_EXCEEDED;
  } catch (const pdapa::InstabilityError& e) {
    set_error(e.what());
    return PDAPA_ERR_UNSTABLE;
  } catch (const std::invalid_argument& e) {
    set_error(e.what());
    return PDAPA_ERR_CONFIG_INVALID;
  } catch (const std::runtime_error& e) {
    set_error(e.what());
    return std::string(e.what()).rfind("io:", 0) == 0 ? PDAPA_ERR_IO
                                                      : PDAPA_ERR_INTERNAL;
  } catch (const std::exception& e) {
    set_error(e.what());
    return PDAPA_ERR_INTERNAL;
  } catch (...) {
    set_error("unknown error");
    return PDAPA_ERR_INTERNAL;
  }
}

std::string format_db(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

extern "C" {

const char* pdapa_version(void) { return "1.0.0"; }

const char* pdapa_status_name(pdapa_status status) {
  switch (status) {
    case PDAPA_OK: return "ok";
    case PDAPA_ERR_INVALID_ARG: return "invalid argument";
    case PDAPA_ERR_CONFIG_NOT_FOUND: return "config not found";
    case PDAPA_ERR_CONFIG_PARSE: return "config parse error";
    case PDAPA_ERR_CONFIG_INVALID: return "config invalid";
    case PDAPA_ERR_UNSTABLE: return "unstable configuration";
    case PDAPA_ERR_CAP_EXCEEDED: return "theory cap exceeded";
    case PDAPA_ERR_IO: return "io error";
    case PDAPA_ERR_INTERNAL: return "internal error";
  }
  return "unknown";
}

const char* pdapa_last_error(void) { return g_last_error.c_str(); }

pdapa_status pdapa_experiment_load(const char* path, pdapa_experiment** out) {
  if (path == nullptr || out == nullptr) {
    set_error("null argument");
    return PDAPA_ERR_INVALID_ARG;
  }
  *out = nullptr;
  try {
    auto config = pdapa::load_config_file(path);
    pdapa::build_setup(config);  // validate eagerly
    *out = new pdapa_experiment{std::move(config)};
    return PDAPA_OK;
  } catch (...) {
    return map_exception();
  }
}

pdapa_status pdapa_experiment_parse(const char* text, pdapa_experiment** out) {
  if (text == nullptr || out == nullptr) {
    set_error("null argument");
    return PDAPA_ERR_INVALID_ARG;
  }
  *out = nullptr;
  try {
    auto config = pdapa::parse_config_text(text);
    pdapa::build_setup(config);
    *out = new pdapa_experiment{std::move(config)};
    return PDAPA_OK;
  } catch (...) {
    return map_exception();
  }
}

void pdapa_experiment_free(pdapa_experiment* experiment) { delete experiment; }

pdapa_status pdapa_experiment_set_seed(pdapa_experiment* experiment, uint64_t seed) {
  if (experiment == nullptr) return PDAPA_ERR_INVALID_ARG;
  experiment->config.seed = seed;
  return PDAPA_OK;
}

pdapa_status pdapa_experiment_set_runs(pdapa_experiment* experiment, int runs) {
  if (experiment == nullptr || runs < 1) return PDAPA_ERR_INVALID_ARG;
  experiment->config.runs = runs;
  return PDAPA_OK;
}

pdapa_status pdapa_experiment_set_jobs(pdapa_experiment* experiment, int jobs) {
  if (experiment == nullptr || jobs < 1) return PDAPA_ERR_INVALID_ARG;
  experiment->config.jobs = jobs;
  return PDAPA_OK;
}

pdapa_status pdapa_simulate(const pdapa_experiment* experiment, pdapa_result** out) {
  if (experiment == nullptr || out == nullptr) return PDAPA_ERR_INVALID_ARG;
  *out = nullptr;
  try {
    auto result = std::make_unique<pdapa_result>();
    result->kind = ResultKind::simulate;
    result->setup = pdapa::build_setup(experiment->config);
    result->curve = pdapa::run_experiment(result->setup);
    const auto& c = result->curve;
    result->curve_db = c.nmsd_db;
    result->scalars = {
        {"steady_nmsd_db", c.steady_nmsd_db},
        {"steady_msd_db", c.steady_msd_db},
        {"diverged_runs", static_cast<double>(c.diverged_runs)},
        {"runs", static_cast<double>(c.runs)},
        {"transmitted_entries_per_iteration",
         static_cast<double>(result->setup.transmitted_entries_per_iteration)},
        {"universal_divergence", c.diverged_runs == c.runs ? 1.0 : 0.0},
    };
    result->summary = "simulate: " + std::to_string(c.runs) + " runs, steady NMSD " +
                      format_db(c.steady_nmsd_db) + " dB, " +
                      std::to_string(c.diverged_runs) + " diverged";
    const bool universal = c.diverged_runs == c.runs;
    *out = result.release();
    if (universal) {
      set_error("simulate: every run diverged past the +100 dB clamp");
      return PDAPA_ERR_UNSTABLE;
    }
    return PDAPA_OK;
  } catch (...) {
    return map_exception();
  }
}

pdapa_status pdapa_theory(const pdapa_experiment* experiment, pdapa_result** out) {
  if (experiment == nullptr || out == nullptr) return PDAPA_ERR_INVALID_ARG;
  *out = nullptr;
  try {
    auto result = std::make_unique<pdapa_result>();
    result->kind = ResultKind::theory;
    result->setup = pdapa::build_setup(experiment->config);
    result->theory = pdapa::run_theory(result->setup);
    const auto& t = result->theory;
    result->curve_db = t.nmsd_db;
    result->scalars = {
        {"mu_max", t.mu_max},
        {"spectral_radius_F", t.spectral_radius_variance},
        {"spectral_radius_mean", t.spectral_radius_mean},
        {"theory_steady_msd_db", t.steady_msd_db},
        {"theory_steady_nmsd_db", t.steady_nmsd_db},
    };
    result->summary = "theory: steady MSD " + format_db(t.steady_msd_db) +
                      " dB, spectral radius " +
                      std::to_string(t.spectral_radius_variance) + ", mu_max " +
                      std::to_string(t.mu_max);
    *out = result.release();
    return PDAPA_OK;
  } catch (...) {
    return map_exception();
  }
}

pdapa_status pdapa_compare(const pdapa_experiment* experiment, pdapa_result** out) {
  if (experiment == nullptr || out == nullptr) return PDAPA_ERR_INVALID_ARG;
  *out = nullptr;
  try {
    auto result = std::make_unique<pdapa_result>();
    result->kind = ResultKind::compare;
    result->setup = pdapa::build_setup(experiment->config);
    result->compare = pdapa::compare_theory(result->setup);
    const auto& cmp = result->compare;
    result->curve_db = cmp.sim.nmsd_db;
    result->scalars = {
        {"sim_steady_nmsd_db", cmp.sim.steady_nmsd_db},
        {"simulation_only", cmp.simulation_only ? 1.0 : 0.0},
        {"theory_unstable", cmp.theory_unstable ? 1.0 : 0.0},
        {"sim_diverged", cmp.sim_diverged ? 1.0 : 0.0},
    };
    if (cmp.theory) {
      result->scalars["theory_steady_nmsd_db"] = cmp.theory->steady_nmsd_db;
      result->scalars["theory_steady_msd_db"] = cmp.theory->steady_msd_db;
      result->scalars["steady_diff_db"] = cmp.steady_diff_db;
      result->scalars["max_abs_diff_db_tail"] = cmp.max_abs_diff_db_tail;
      result->scalars["mu_max"] = cmp.theory->mu_max;
      result->summary = "compare: sim " + format_db(cmp.sim.steady_nmsd_db) +
                        " dB vs theory " + format_db(cmp.theory->steady_nmsd_db) +
                        " dB (diff " + format_db(cmp.steady_diff_db) + " dB)";
    } else {
      result->summary = std::string("compare: ") +
                        (cmp.simulation_only ? "simulation-only (" : "no theory (") +
                        cmp.note + ")";
    }
    *out = result.release();
    return PDAPA_OK;
  } catch (...) {
    return map_exception();
  }
}

void pdapa_result_free(pdapa_result* result) { delete result; }

pdapa_status pdapa_result_write(const pdapa_result* result, const char* out_dir) {
  if (result == nullptr || out_dir == nullptr) return PDAPA_ERR_INVALID_ARG;
  try {
    std::filesystem::create_directories(out_dir);
    const std::string dir = std::string(out_dir) + "/";
    switch (result->kind) {
      case ResultKind::simulate:
        pdapa::write_curve_csv(dir + "learning_curve.csv", result->curve);
        pdapa::write_summary_json(dir + "summary.json", result->setup, result->curve);
        if (result->setup.config.dump_optimum) {
          pdapa::write_optimum_txt(dir + "optimum.txt", result->setup.optimum);
        }
        break;
      case ResultKind::theory:
        pdapa::write_theory_json(dir + "theory.json", result->theory);
        break;
      case ResultKind::compare:
        pdapa::write_curve_csv(dir + "learning_curve.csv", result->compare.sim);
        pdapa::write_compare_csv(dir + "compare.csv", result->compare);
        pdapa::write_compare_json(dir + "compare.json", result->compare);
        break;
    }
    return PDAPA_OK;
  } catch (const std::filesystem::filesystem_error& e) {
    set_error(e.what());
    return PDAPA_ERR_IO;
  } catch (...) {
    return map_exception();
  }
}

const char* pdapa_result_summary(const pdapa_result* result) {
  return result == nullptr ? "" : result->summary.c_str();
}

pdapa_status pdapa_result_curve_length(const pdapa_result* result, int* out) {
  if (result == nullptr || out == nullptr) return PDAPA_ERR_INVALID_ARG;
  *out = static_cast<int>(result->curve_db.size());
  return PDAPA_OK;
}

pdapa_status pdapa_result_nmsd_db(const pdapa_result* result, double* buffer,
                                  int capacity) {
  if (result == nullptr || buffer == nullptr ||
      capacity < static_cast<int>(result->curve_db.size())) {
    set_error("buffer too small or null");
    return PDAPA_ERR_INVALID_ARG;
  }
  std::memcpy(buffer, result->curve_db.data(), result->curve_db.size() * sizeof(double));
  return PDAPA_OK;
}

pdapa_status pdapa_result_scalar(const pdapa_result* result, const char* key,
                                 double* out) {
  if (result == nullptr || key == nullptr || out == nullptr) {
    return PDAPA_ERR_INVALID_ARG;
  }
  const auto it = result->scalars.find(key);
  if (it == result->scalars.end()) {
    set_error(std::string("no scalar named '") + key + "'");
    return PDAPA_ERR_INVALID_ARG;
  }
  *out = it->second;
  return PDAPA_OK;
}

pdapa_status pdapa_selftest(int* checks, int* failures) {
  if (checks == nullptr || failures == nullptr) return PDAPA_ERR_INVALID_ARG;
  try {
    const auto result = pdapa::run_selftest();
    *checks = static_cast<int>(result.checks.size());
    *failures = result.failures();
    std::string detail;
    for (const auto& c : result.checks) {
      if (!c.passed) detail += c.name + ": " + c.detail + "; ";
    }
    set_error(detail);
    return PDAPA_OK;
  } catch (...) {
    return map_exception();
  }
}

}  // extern "C"

// Command-line front end for the pdapa shared library. Talks to the engine
// exclusively through the C API in pdapa/pdapa.h.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "pdapa/pdapa.h"

namespace {

// Exit codes, also documented in the README:
//   0 ok, 2 usage, 3 config not found, 4 config parse error,
//   5 config invalid, 6 unstable/divergent, 7 theory cap exceeded,
//   8 io error, 1 anything else.
int exit_code(pdapa_status status) {
  switch (status) {
    case PDAPA_OK: return 0;
    case PDAPA_ERR_CONFIG_NOT_FOUND: return 3;
    case PDAPA_ERR_CONFIG_PARSE: return 4;
    case PDAPA_ERR_CONFIG_INVALID: return 5;
    case PDAPA_ERR_UNSTABLE: return 6;
    case PDAPA_ERR_CAP_EXCEEDED: return 7;
    case PDAPA_ERR_IO: return 8;
    case PDAPA_ERR_INVALID_ARG:
    case PDAPA_ERR_INTERNAL: return 1;
  }
  return 1;
}

bool verbose() {
  const char* level = std::getenv("PDAPA_LOG");
  return level != nullptr && std::string(level) != "quiet" && std::string(level) != "0";
}

struct ExperimentHandle {
  pdapa_experiment* ptr = nullptr;
  ~ExperimentHandle() { pdapa_experiment_free(ptr); }
};

struct ResultHandle {
  pdapa_result* ptr = nullptr;
  ~ResultHandle() { pdapa_result_free(ptr); }
};

struct Options {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int runs = 0;
  int jobs = 0;
};

int run_pipeline(const Options& opt,
                 pdapa_status (*pipeline)(const pdapa_experiment*, pdapa_result**)) {
  ExperimentHandle experiment;
  pdapa_status status = pdapa_experiment_load(opt.config_path.c_str(), &experiment.ptr);
  if (status != PDAPA_OK) {
    std::fprintf(stderr, "pdapa: %s: %s\n", pdapa_status_name(status),
                 pdapa_last_error());
    return exit_code(status);
  }
  if (opt.seed_set) pdapa_experiment_set_seed(experiment.ptr, opt.seed);
  if (opt.runs > 0) pdapa_experiment_set_runs(experiment.ptr, opt.runs);
  if (opt.jobs > 0) pdapa_experiment_set_jobs(experiment.ptr, opt.jobs);

  if (verbose()) std::fprintf(stderr, "pdapa: running %s\n", opt.config_path.c_str());
  ResultHandle result;
  status = pipeline(experiment.ptr, &result.ptr);
  if (result.ptr == nullptr) {
    std::fprintf(stderr, "pdapa: %s: %s\n", pdapa_status_name(status),
                 pdapa_last_error());
    return exit_code(status);
  }
  const pdapa_status write_status = pdapa_result_write(result.ptr, opt.out_dir.c_str());
  if (write_status != PDAPA_OK) {
    std::fprintf(stderr, "pdapa: %s: %s\n", pdapa_status_name(write_status),
                 pdapa_last_error());
    return exit_code(write_status);
  }
  std::printf("%s\n", pdapa_result_summary(result.ptr));
  if (status != PDAPA_OK) {
    std::fprintf(stderr, "pdapa: %s: %s\n", pdapa_status_name(status),
                 pdapa_last_error());
  }
  return exit_code(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-task partial-diffusion APA simulator and theory engine"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(pdapa_version()));

  Options opt;
  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    if (needs_config) {
      cmd->add_option("--config", opt.config_path, "experiment config file")
          ->required();
    }
    cmd->add_option("--out", opt.out_dir, "output directory");
    cmd->add_option("--seed", opt.seed, "override the experiment seed")
        ->each([&](const std::string&) { opt.seed_set = true; });
    cmd->add_option("--runs", opt.runs, "override the Monte-Carlo run count");
    cmd->add_option("--jobs", opt.jobs, "worker threads for independent runs");
  };

  auto* simulate = app.add_subcommand("simulate", "run the Monte-Carlo simulation");
  add_common(simulate, true);
  auto* theory = app.add_subcommand("theory", "evaluate the analytical model");
  add_common(theory, true);
  auto* compare = app.add_subcommand("compare", "simulate and compare against theory");
  add_common(compare, true);
  auto* selftest = app.add_subcommand("selftest", "run the built-in invariant suite");
  (void)selftest;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (simulate->parsed()) return run_pipeline(opt, pdapa_simulate);
  if (theory->parsed()) return run_pipeline(opt, pdapa_theory);
  if (compare->parsed()) return run_pipeline(opt, pdapa_compare);
  if (selftest->parsed()) {
    int checks = 0;
    int failures = 0;
    const pdapa_status status = pdapa_selftest(&checks, &failures);
    if (status != PDAPA_OK) {
      std::fprintf(stderr, "pdapa: %s: %s\n", pdapa_status_name(status),
                   pdapa_last_error());
      return exit_code(status);
    }
    std::printf("selftest: %d/%d checks passed\n", checks - failures, checks);
    if (failures > 0) std::fprintf(stderr, "pdapa: failing: %s\n", pdapa_last_error());
    return failures == 0 ? 0 : 1;
  }
  return 2;
}

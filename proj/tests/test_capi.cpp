#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pdapa/pdapa.h"

namespace {

const char* kConfig = R"([topology]
nodes = 3
edge = 1 2
edge = 2 3
edge = 1 3
[clusters]
cluster = 1 2
cluster = 3
[signal]
noise_var = 0.004
[algorithm]
L = 4
P = 2
M = 2
scheme = uncoordinated
mu = 0.5
eta = 0.0018
epsilon = 1e-3
[experiment]
iterations = 200
runs = 4
seed = 31
theory_samples = 2000
)";

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("version and status strings exist") {
  CHECK(std::string(pdapa_version()) == "1.0.0");
  CHECK(std::string(pdapa_status_name(PDAPA_OK)) == "ok");
  CHECK(std::string(pdapa_status_name(PDAPA_ERR_CONFIG_PARSE)).find("parse") !=
        std::string::npos);
}

TEST_CASE("null arguments are rejected") {
  CHECK(pdapa_experiment_load(nullptr, nullptr) == PDAPA_ERR_INVALID_ARG);
  pdapa_experiment* experiment = nullptr;
  CHECK(pdapa_experiment_parse(nullptr, &experiment) == PDAPA_ERR_INVALID_ARG);
  CHECK(pdapa_simulate(nullptr, nullptr) == PDAPA_ERR_INVALID_ARG);
}

TEST_CASE("missing config file maps to the dedicated status") {
  pdapa_experiment* experiment = nullptr;
  CHECK(pdapa_experiment_load("/no/such/file.cfg", &experiment) ==
        PDAPA_ERR_CONFIG_NOT_FOUND);
  CHECK(experiment == nullptr);
  CHECK(std::string(pdapa_last_error()).find("cannot open") != std::string::npos);
}

TEST_CASE("parse and semantic errors carry their own codes") {
  pdapa_experiment* experiment = nullptr;
  CHECK(pdapa_experiment_parse("[topology]\nnodes = x\n", &experiment) ==
        PDAPA_ERR_CONFIG_PARSE);
  CHECK(pdapa_experiment_parse(
            "[topology]\nnodes = 2\n[clusters]\ncluster = 1 2\n"
            "[algorithm]\nmu = 0.5\n",
            &experiment) == PDAPA_ERR_CONFIG_INVALID);  // disconnected graph
}

TEST_CASE("simulation through the shared library") {
  pdapa_experiment* experiment = nullptr;
  REQUIRE(pdapa_experiment_parse(kConfig, &experiment) == PDAPA_OK);
  REQUIRE(experiment != nullptr);

  pdapa_result* result = nullptr;
  REQUIRE(pdapa_simulate(experiment, &result) == PDAPA_OK);
  REQUIRE(result != nullptr);

  int len = 0;
  CHECK(pdapa_result_curve_length(result, &len) == PDAPA_OK);
  CHECK(len == 200);
  std::vector<double> curve(len);
  CHECK(pdapa_result_nmsd_db(result, curve.data(), len) == PDAPA_OK);
  CHECK(curve[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(curve[len - 1] < -5.0);

  double steady = 0.0;
  CHECK(pdapa_result_scalar(result, "steady_nmsd_db", &steady) == PDAPA_OK);
  CHECK(steady < -5.0);
  double missing = 0.0;
  CHECK(pdapa_result_scalar(result, "nope", &missing) == PDAPA_ERR_INVALID_ARG);

  CHECK(std::string(pdapa_result_summary(result)).find("simulate") == 0);

  const char* dir = "/tmp/pdapa_capi_out";
  std::filesystem::remove_all(dir);
  CHECK(pdapa_result_write(result, dir) == PDAPA_OK);
  CHECK(std::filesystem::exists(std::string(dir) + "/learning_curve.csv"));
  CHECK(std::filesystem::exists(std::string(dir) + "/summary.json"));

  pdapa_result_free(result);
  pdapa_experiment_free(experiment);
  std::filesystem::remove_all(dir);
}

TEST_CASE("seed override changes outputs and reruns reproduce bytes") {
  pdapa_experiment* experiment = nullptr;
  REQUIRE(pdapa_experiment_parse(kConfig, &experiment) == PDAPA_OK);

  pdapa_result* base = nullptr;
  REQUIRE(pdapa_simulate(experiment, &base) == PDAPA_OK);
  pdapa_result* again = nullptr;
  REQUIRE(pdapa_simulate(experiment, &again) == PDAPA_OK);

  const char* dir_a = "/tmp/pdapa_capi_a";
  const char* dir_b = "/tmp/pdapa_capi_b";
  std::filesystem::remove_all(dir_a);
  std::filesystem::remove_all(dir_b);
  REQUIRE(pdapa_result_write(base, dir_a) == PDAPA_OK);
  REQUIRE(pdapa_result_write(again, dir_b) == PDAPA_OK);
  CHECK(slurp(std::string(dir_a) + "/learning_curve.csv") ==
        slurp(std::string(dir_b) + "/learning_curve.csv"));

  CHECK(pdapa_experiment_set_seed(experiment, 777) == PDAPA_OK);
  pdapa_result* reseeded = nullptr;
  REQUIRE(pdapa_simulate(experiment, &reseeded) == PDAPA_OK);
  const char* dir_c = "/tmp/pdapa_capi_c";
  std::filesystem::remove_all(dir_c);
  REQUIRE(pdapa_result_write(reseeded, dir_c) == PDAPA_OK);
  CHECK(slurp(std::string(dir_a) + "/learning_curve.csv") !=
        slurp(std::string(dir_c) + "/learning_curve.csv"));

  pdapa_result_free(base);
  pdapa_result_free(again);
  pdapa_result_free(reseeded);
  pdapa_experiment_free(experiment);
  std::filesystem::remove_all(dir_a);
  std::filesystem::remove_all(dir_b);
  std::filesystem::remove_all(dir_c);
}

TEST_CASE("theory and compare endpoints work end to end") {
  pdapa_experiment* experiment = nullptr;
  REQUIRE(pdapa_experiment_parse(kConfig, &experiment) == PDAPA_OK);
  REQUIRE(pdapa_experiment_set_runs(experiment, 8) == PDAPA_OK);

  pdapa_result* theory = nullptr;
  REQUIRE(pdapa_theory(experiment, &theory) == PDAPA_OK);
  double mu_max = 0.0;
  CHECK(pdapa_result_scalar(theory, "mu_max", &mu_max) == PDAPA_OK);
  CHECK(mu_max > 0.5);
  double rho = 0.0;
  CHECK(pdapa_result_scalar(theory, "spectral_radius_F", &rho) == PDAPA_OK);
  CHECK(rho < 1.0);

  const char* dir = "/tmp/pdapa_capi_theory";
  std::filesystem::remove_all(dir);
  REQUIRE(pdapa_result_write(theory, dir) == PDAPA_OK);
  const auto text = slurp(std::string(dir) + "/theory.json");
  CHECK(text.find("\"mu_max\"") != std::string::npos);
  CHECK(text.find("\"msd_transient\"") != std::string::npos);
  CHECK(text.find("\"msd_steady_db\"") != std::string::npos);
  CHECK(text.find("\"spectral_radius_F\"") != std::string::npos);

  pdapa_result* compare = nullptr;
  REQUIRE(pdapa_compare(experiment, &compare) == PDAPA_OK);
  double diff = 0.0;
  CHECK(pdapa_result_scalar(compare, "steady_diff_db", &diff) == PDAPA_OK);
  CHECK(std::abs(diff) < 6.0);
  REQUIRE(pdapa_result_write(compare, dir) == PDAPA_OK);
  CHECK(std::filesystem::exists(std::string(dir) + "/compare.csv"));
  CHECK(std::filesystem::exists(std::string(dir) + "/compare.json"));

  pdapa_result_free(theory);
  pdapa_result_free(compare);
  pdapa_experiment_free(experiment);
  std::filesystem::remove_all(dir);
}

TEST_CASE("optimum dump is written when requested") {
  std::string config(kConfig);
  config += "dump_optimum = true\n";
  pdapa_experiment* experiment = nullptr;
  REQUIRE(pdapa_experiment_parse(config.c_str(), &experiment) == PDAPA_OK);
  pdapa_result* result = nullptr;
  REQUIRE(pdapa_simulate(experiment, &result) == PDAPA_OK);
  const char* dir = "/tmp/pdapa_capi_dump";
  std::filesystem::remove_all(dir);
  REQUIRE(pdapa_result_write(result, dir) == PDAPA_OK);
  const auto text = slurp(std::string(dir) + "/optimum.txt");
  // 4 taps, one row each, 3 space-separated node columns.
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
  CHECK(std::count(text.begin(), text.end(), ' ') == 4 * 2);
  pdapa_result_free(result);
  pdapa_experiment_free(experiment);
  std::filesystem::remove_all(dir);
}

TEST_CASE("selftest passes through the api") {
  int checks = 0;
  int failures = 0;
  REQUIRE(pdapa_selftest(&checks, &failures) == PDAPA_OK);
  CHECK(checks >= 4);
  CHECK(failures == 0);
}

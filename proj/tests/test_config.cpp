#include <doctest.h>

#include "config.hpp"

using namespace pdapa;

namespace {

const char* kGoodConfig = R"(# demo experiment
[topology]
nodes = 4
edge = 1 2
edge = 2 3
edge = 3 4
edge = 1 3

[clusters]
cluster = 1 2
cluster = 3 4

[signal]
ar_coeff = auto
input_var = 0.9 1.0 1.1 1.0
noise_var = 0.004
delta = 0.025 -0.025

[algorithm]
L = 8
P = 2
M = 4
scheme = coordinated
mode = partial
mu = 0.5
eta = 0.0018
epsilon = 1e-4

[experiment]
iterations = 500
runs = 10
seed = 99
jobs = 2
per_node_curves = true
theory_samples = 5000
theory_cap = 40
)";

}  // namespace

TEST_CASE("well-formed config parses into the expected experiment") {
  const auto cfg = parse_config_text(kGoodConfig);
  CHECK(cfg.adjacency.size() == 4);
  CHECK(cfg.adjacency[0][1]);
  CHECK(cfg.adjacency[1][0]);
  CHECK(cfg.adjacency[0][2]);
  CHECK_FALSE(cfg.adjacency[0][3]);
  CHECK(cfg.cluster_of == std::vector<int>{0, 0, 1, 1});
  CHECK(cfg.ar_coeffs.empty());  // auto
  CHECK(cfg.input_vars.size() == 4);
  CHECK(cfg.noise_vars == std::vector<double>{0.004});
  CHECK(cfg.deltas == std::vector<double>{0.025, -0.025});
  CHECK(cfg.filter_length == 8);
  CHECK(cfg.block_rows == 2);
  CHECK(cfg.shared_entries == 4);
  CHECK(cfg.scheme == SelectionScheme::coordinated);
  CHECK(cfg.mode == DiffusionMode::partial);
  CHECK(cfg.step_sizes == std::vector<double>{0.5});
  CHECK(cfg.coupling_strength == 0.0018);
  CHECK(cfg.epsilon == 1e-4);
  CHECK(cfg.iterations == 500);
  CHECK(cfg.runs == 10);
  CHECK(cfg.seed == 99);
  CHECK(cfg.jobs == 2);
  CHECK(cfg.per_node_curves);
  CHECK(cfg.theory_samples == 5000);
  CHECK(cfg.theory_cap == 40);

  const auto setup = build_setup(cfg);
  CHECK(setup.topology.cluster_count == 2);
}

TEST_CASE("parse errors carry line information") {
  try {
    parse_config_text("[topology]\nnodes = 4\nbogus_key = 1\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.kind() == ConfigErrorKind::parse);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("malformed inputs are rejected") {
  CHECK_THROWS_AS(parse_config_text("[nope]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("key = 1\n"), ConfigError);          // no section
  CHECK_THROWS_AS(parse_config_text("[topology]\nnodes = abc\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[topology]\nnodes 4\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[topology]\nedge = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[algorithm]\nmu =\n"), ConfigError);
}

TEST_CASE("semantic errors are distinct from parse errors") {
  // Edge references an unknown node.
  const char* bad_edge =
      "[topology]\nnodes = 2\nedge = 1 5\n[clusters]\ncluster = 1 2\n"
      "[algorithm]\nmu = 0.5\n";
  try {
    parse_config_text(bad_edge);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.kind() == ConfigErrorKind::semantic);
  }

  // Node in two clusters.
  const char* twice =
      "[topology]\nnodes = 2\nedge = 1 2\n[clusters]\ncluster = 1 2\ncluster = 2\n"
      "[algorithm]\nmu = 0.5\n";
  CHECK_THROWS_AS(parse_config_text(twice), ConfigError);

  // Unassigned node.
  const char* missing =
      "[topology]\nnodes = 3\nedge = 1 2\nedge = 2 3\n[clusters]\ncluster = 1 2\n"
      "[algorithm]\nmu = 0.5\n";
  CHECK_THROWS_AS(parse_config_text(missing), ConfigError);

  // Required keys absent.
  CHECK_THROWS_AS(parse_config_text("[clusters]\ncluster = 1\n"), ConfigError);
  CHECK_THROWS_AS(
      parse_config_text("[topology]\nnodes = 1\n[clusters]\ncluster = 1\n"),
      ConfigError);
}

TEST_CASE("missing files throw the io kind") {
  try {
    load_config_file("/nonexistent/pdapa.cfg");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.kind() == ConfigErrorKind::io);
  }
}

TEST_CASE("comments and blank lines are ignored") {
  const char* text =
      "# header\n\n[topology]\nnodes = 2  # inline\nedge = 1 2\n\n"
      "[clusters]\ncluster = 1\ncluster = 2\n[algorithm]\nmu = 0.5\n";
  const auto cfg = parse_config_text(text);
  CHECK(cfg.adjacency.size() == 2);
  CHECK(cfg.cluster_of == std::vector<int>{0, 1});
}

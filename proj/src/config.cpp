#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <vector>

namespace pdapa {

namespace {

std::string trim(const std::string& s) {
  auto begin = s.find_first_not_of(" \t\r");
  auto end = s.find_last_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  return s.substr(begin, end - begin + 1);
}

[[noreturn]] void fail(int line, const std::string& message) {
  throw ConfigError(ConfigErrorKind::parse,
                    "config line " + std::to_string(line) + ": " + message);
}

std::vector<double> parse_numbers(const std::string& value, int line) {
  std::vector<double> out;
  std::istringstream in(value);
  std::string token;
  while (in >> token) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(token, &used));
      if (used != token.size()) fail(line, "bad number '" + token + "'");
    } catch (const std::logic_error&) {
      fail(line, "bad number '" + token + "'");
    }
  }
  if (out.empty()) fail(line, "expected at least one number");
  return out;
}

long parse_integer(const std::string& value, int line) {
  try {
    std::size_t used = 0;
    const long v = std::stol(value, &used, 10);
    if (used != trim(value).size()) fail(line, "bad integer '" + value + "'");
    return v;
  } catch (const std::logic_error&) {
    fail(line, "bad integer '" + value + "'");
  }
}

bool parse_bool(const std::string& value, int line) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  fail(line, "expected a boolean, got '" + value + "'");
}

struct Edge {
  int a, b;
};

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  int nodes = 0;
  std::vector<Edge> edges;
  std::vector<std::vector<int>> clusters;
  bool have_mu = false;

  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string text_line = trim(raw);
    if (text_line.empty()) continue;

    if (text_line.front() == '[') {
      if (text_line.back() != ']') fail(line, "unterminated section header");
      section = trim(text_line.substr(1, text_line.size() - 2));
      if (section != "topology" && section != "clusters" && section != "signal" &&
          section != "algorithm" && section != "experiment") {
        fail(line, "unknown section [" + section + "]");
      }
      continue;
    }

    const auto eq = text_line.find('=');
    if (eq == std::string::npos) fail(line, "expected key = value");
    const std::string key = trim(text_line.substr(0, eq));
    const std::string value = trim(text_line.substr(eq + 1));
    if (key.empty() || value.empty()) fail(line, "empty key or value");
    if (section.empty()) fail(line, "key outside any section");

    if (section == "topology") {
      if (key == "nodes") {
        nodes = static_cast<int>(parse_integer(value, line));
        if (nodes < 1) fail(line, "nodes must be >= 1");
      } else if (key == "edge") {
        std::istringstream ev(value);
        Edge e{};
        if (!(ev >> e.a >> e.b)) fail(line, "edge needs two node ids");
        std::string extra;
        if (ev >> extra) fail(line, "edge takes exactly two node ids");
        edges.push_back(e);
      } else {
        fail(line, "unknown topology key '" + key + "'");
      }
    } else if (section == "clusters") {
      if (key != "cluster") fail(line, "unknown clusters key '" + key + "'");
      std::istringstream cv(value);
      std::vector<int> members;
      int id;
      while (cv >> id) members.push_back(id);
      if (members.empty()) fail(line, "cluster needs at least one node id");
      clusters.push_back(std::move(members));
    } else if (section == "signal") {
      const bool automatic = value == "auto";
      if (key == "ar_coeff") {
        if (!automatic) cfg.ar_coeffs = parse_numbers(value, line);
      } else if (key == "input_var") {
        if (!automatic) cfg.input_vars = parse_numbers(value, line);
      } else if (key == "noise_var") {
        if (!automatic) cfg.noise_vars = parse_numbers(value, line);
      } else if (key == "delta") {
        cfg.deltas = parse_numbers(value, line);
      } else {
        fail(line, "unknown signal key '" + key + "'");
      }
    } else if (section == "algorithm") {
      if (key == "L") {
        cfg.filter_length = static_cast<int>(parse_integer(value, line));
      } else if (key == "P") {
        cfg.block_rows = static_cast<int>(parse_integer(value, line));
      } else if (key == "M") {
        cfg.shared_entries = static_cast<int>(parse_integer(value, line));
      } else if (key == "scheme") {
        try {
          cfg.scheme = parse_scheme(value);
        } catch (const std::invalid_argument& e) {
          fail(line, e.what());
        }
      } else if (key == "mode") {
        try {
          cfg.mode = parse_mode(value);
        } catch (const std::invalid_argument& e) {
          fail(line, e.what());
        }
      } else if (key == "mu") {
        cfg.step_sizes = parse_numbers(value, line);
        have_mu = true;
      } else if (key == "eta") {
        cfg.coupling_strength = parse_numbers(value, line).front();
      } else if (key == "epsilon") {
        cfg.epsilon = parse_numbers(value, line).front();
      } else {
        fail(line, "unknown algorithm key '" + key + "'");
      }
    } else if (section == "experiment") {
      if (key == "iterations") {
        cfg.iterations = static_cast<int>(parse_integer(value, line));
      } else if (key == "runs") {
        cfg.runs = static_cast<int>(parse_integer(value, line));
      } else if (key == "seed") {
        cfg.seed = static_cast<std::uint64_t>(parse_integer(value, line));
      } else if (key == "jobs") {
        cfg.jobs = static_cast<int>(parse_integer(value, line));
      } else if (key == "per_node_curves") {
        cfg.per_node_curves = parse_bool(value, line);
      } else if (key == "dump_optimum") {
        cfg.dump_optimum = parse_bool(value, line);
      } else if (key == "theory_samples") {
        cfg.theory_samples = static_cast<int>(parse_integer(value, line));
      } else if (key == "theory_cap") {
        cfg.theory_cap = static_cast<int>(parse_integer(value, line));
      } else {
        fail(line, "unknown experiment key '" + key + "'");
      }
    }
  }

  if (nodes < 1) {
    throw ConfigError(ConfigErrorKind::semantic, "config: [topology] nodes is required");
  }
  if (clusters.empty()) {
    throw ConfigError(ConfigErrorKind::semantic, "config: at least one cluster is required");
  }
  if (!have_mu) {
    throw ConfigError(ConfigErrorKind::semantic, "config: [algorithm] mu is required");
  }

  cfg.adjacency.assign(nodes, std::vector<bool>(nodes, false));
  for (int i = 0; i < nodes; ++i) cfg.adjacency[i][i] = true;
  for (const auto& e : edges) {
    if (e.a < 1 || e.a > nodes || e.b < 1 || e.b > nodes) {
      throw ConfigError(ConfigErrorKind::semantic,
                        "config: edge references node outside 1.." + std::to_string(nodes));
    }
    cfg.adjacency[e.a - 1][e.b - 1] = true;
    cfg.adjacency[e.b - 1][e.a - 1] = true;
  }

  cfg.cluster_of.assign(nodes, -1);
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    for (int member : clusters[c]) {
      if (member < 1 || member > nodes) {
        throw ConfigError(ConfigErrorKind::semantic,
                          "config: cluster references node outside 1.." +
                              std::to_string(nodes));
      }
      if (cfg.cluster_of[member - 1] != -1) {
        throw ConfigError(ConfigErrorKind::semantic,
                          "config: node " + std::to_string(member) +
                              " assigned to two clusters");
      }
      cfg.cluster_of[member - 1] = static_cast<int>(c);
    }
  }
  for (int k = 0; k < nodes; ++k) {
    if (cfg.cluster_of[k] == -1) {
      throw ConfigError(ConfigErrorKind::semantic,
                        "config: node " + std::to_string(k + 1) + " has no cluster");
    }
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) {
    throw ConfigError(ConfigErrorKind::io, "config: cannot open '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return parse_config_text(buffer.str());
}

}  // namespace pdapa

#pragma once

#include <stdexcept>
#include <string>

#include "harness.hpp"

namespace pdapa {

enum class ConfigErrorKind { io, parse, semantic };

class ConfigError : public std::runtime_error {
 public:
  ConfigError(ConfigErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ConfigErrorKind kind() const { return kind_; }

 private:
  ConfigErrorKind kind_;
};

// Plain-text experiment description with [topology], [clusters], [signal],
// [algorithm] and [experiment] sections; see the README for the grammar.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

}  // namespace pdapa

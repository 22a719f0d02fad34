#pragma once

#include <string>
#include <vector>

namespace pdapa {

struct SelftestResult {
  struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
  };
  std::vector<Check> checks;

  int failures() const {
    int n = 0;
    for (const auto& c : checks) n += c.passed ? 0 : 1;
    return n;
  }
};

// Built-in invariant suite: selection moments, block-vectorization identity,
// combination weight sums, and the algorithm reduction equivalences.
SelftestResult run_selftest();

}  // namespace pdapa

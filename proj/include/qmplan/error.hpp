#pragma once

#include <stdexcept>
#include <string>

namespace qmplan {

// Bad user input: malformed files, out-of-range parameters, missing paths.
// The CLI maps this to exit code 1.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Violated algorithmic precondition discovered mid-run (negative distance
// entries, uncertified cost table, unreachable goal, ...). Exit code 2.
struct ComputeError : std::runtime_error {
  explicit ComputeError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qmplan

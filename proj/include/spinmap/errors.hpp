// errors.hpp — error taxonomy shared across the library; the CLI maps these to exit codes.
#pragma once

#include <stdexcept>
#include <string>

namespace spinmap {

// Malformed or out-of-range configuration input.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Requested state space exceeds the configured memory budget or other hard resource limit.
struct ResourceError : std::runtime_error {
  explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

// Analysis inputs are missing, inconsistent, or numerically unusable (e.g. ill-conditioned
// reconstruction basis, trailing window longer than the run).
struct AnalysisError : std::runtime_error {
  explicit AnalysisError(const std::string& what) : std::runtime_error(what) {}
};

// Parameters fall outside the regime a closed-form result is valid in (e.g. overdamped
// rates where the oscillatory solution does not exist).
struct RegimeError : std::runtime_error {
  explicit RegimeError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace spinmap

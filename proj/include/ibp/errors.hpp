#pragma once

#include <stdexcept>
#include <string>

namespace ibp {

/// Invalid user-supplied configuration (bad JSON, unknown keys, bad ranges).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A constructive step (perturbation, dense build) failed its own grid
/// verification. Carries the first offending q when there is one.
struct ConstructionError : std::runtime_error {
  explicit ConstructionError(const std::string& what, double q = 0.0)
      : std::runtime_error(what), offending_q(q) {}
  double offending_q;
};

/// The 3x3 system could not be solved reliably.
struct DegenerateSystemError : std::runtime_error {
  explicit DegenerateSystemError(const std::string& what) : std::runtime_error(what) {}
};

/// Requested alpha bins do not cover the attainable range at this depth.
struct CoverageError : std::runtime_error {
  CoverageError(const std::string& what, double lo, double hi)
      : std::runtime_error(what), alpha_min(lo), alpha_max(hi) {}
  double alpha_min;
  double alpha_max;
};

}  // namespace ibp

#pragma once

#include <stdexcept>
#include <string>

namespace conecoord {

// Invalid solver or experiment configuration (bad schedule, missing field,
// inconsistent shapes at setup time). CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// The block subproblem has no available solver (nonlinear constraint block
// without a user-supplied solver, unsupported core function). Exit code 3.
class UnsupportedSubproblem : public std::runtime_error {
 public:
  explicit UnsupportedSubproblem(const std::string& what)
      : std::runtime_error(what) {}
};

// A point handed to a dual-bound estimator is not strictly feasible.
class SlaterViolation : public std::runtime_error {
 public:
  explicit SlaterViolation(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace conecoord

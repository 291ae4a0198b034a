#pragma once

#include <stdexcept>
#include <string>

namespace qsn {

/// Bad user input: indices, names, sizes, files.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// A numeric precondition failed (non-unitary gate, incomplete Kraus set, ...).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Argument outside the mathematical domain of the function.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Fisher information at or below the floor; the cost 1/Q is unbounded.
class DegenerateProbeError : public std::runtime_error {
 public:
  explicit DegenerateProbeError(const std::string& what) : std::runtime_error(what) {}
};

/// Every restart of an optimization hit a degenerate probe.
class OptimizationFailure : public std::runtime_error {
 public:
  explicit OptimizationFailure(const std::string& what) : std::runtime_error(what) {}
};

/// Posterior mass vanished after an update.
class DegenerateLikelihoodError : public std::runtime_error {
 public:
  explicit DegenerateLikelihoodError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qsn

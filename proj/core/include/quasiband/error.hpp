#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace quasiband {

/// Invalid input to a library routine (bad dimension, malformed graph, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent experiment configuration / input file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine could not produce a trustworthy answer.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when the symmetric-indefinite factorization keeps hitting
/// near-zero pivots after the full shift-perturbation ladder.
class FactorizationBreakdown : public NumericalError {
 public:
  FactorizationBreakdown(const std::string& what, std::vector<double> shifts)
      : NumericalError(what), attempted_shifts_(std::move(shifts)) {}

  const std::vector<double>& attempted_shifts() const noexcept { return attempted_shifts_; }

 private:
  std::vector<double> attempted_shifts_;
};

}  // namespace quasiband

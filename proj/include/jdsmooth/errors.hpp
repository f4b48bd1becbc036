#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace jdsmooth {

// Bad input or configuration: maps to CLI exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Numerical breakdown (non-convergence, explosion, degenerate design): exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable or unwritable file: exit code 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PathExplosion : public NumericalError {
 public:
  PathExplosion(std::size_t step, double value)
      : NumericalError("simulated state left the admissible range at substep " +
                       std::to_string(step) + " (value " + std::to_string(value) + ")"),
        step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace jdsmooth

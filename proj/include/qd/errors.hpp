#pragma once

#include <stdexcept>
#include <string>

namespace qd {

// Raised when caller-supplied parameters are outside the supported domain
// (negative thresholds, shape parameters out of range, contradictory
// configuration, and so on).  The CLI maps this to exit code 2.
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

// Raised when a numerical routine cannot meet its accuracy contract
// (non-convergent iteration, residual above tolerance, resonant kernel).
// The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qd

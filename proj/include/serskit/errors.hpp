#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace sers {

/// Raised when an image/enhancement denominator sits on a physical
/// resonance pole instead of silently overflowing.
class ResonanceSingularityError : public std::runtime_error {
 public:
  explicit ResonanceSingularityError(const std::string& what)
      : std::runtime_error(what) {}
};

/// Raised by fixed-point loops that fail to contract.
class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, std::vector<double> residuals)
      : std::runtime_error(what), residual_history(std::move(residuals)) {}

  std::vector<double> residual_history;
};

class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sers

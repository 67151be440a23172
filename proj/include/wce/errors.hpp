#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace wce {

/// Caller misuse: mismatched spaces, violated preconditions.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input data that does not parse or violates a structural invariant.
/// Carries the offending location (file / field path).
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string where, const std::string& what)
      : std::runtime_error(where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

/// An iterative scheme failed to reach its tolerance. Carries the best
/// bound obtained before giving up.
class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(const std::string& what, double best_bound)
      : std::runtime_error(what), best_bound_(best_bound) {}
  double best_bound() const { return best_bound_; }

 private:
  double best_bound_;
};

/// A random-instance profile that cannot be satisfied for the requested shape.
class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wce

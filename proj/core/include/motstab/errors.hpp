#pragma once

#include <stdexcept>
#include <string>

namespace motstab {

/// Precondition violated by the caller (bad argument, mismatched masses, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A value failed its structural invariant check (e.g. a non-convex potential).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Internal consistency check failed; indicates a bug rather than bad input.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Raised when a pair (mu, nu) is not in convex order. Carries the point where
/// the potential of mu exceeds the potential of nu the most.
class ConvexOrderViolation : public DomainError {
 public:
  ConvexOrderViolation(const std::string& what, double witness, double excess)
      : DomainError(what), witness_(witness), excess_(excess) {}

  double witness() const noexcept { return witness_; }
  /// u_mu(witness) - u_nu(witness); positive for a genuine violation. For a
  /// mass or mean mismatch this holds the mismatch instead.
  double excess() const noexcept { return excess_; }

 private:
  double witness_;
  double excess_;
};

}  // namespace motstab

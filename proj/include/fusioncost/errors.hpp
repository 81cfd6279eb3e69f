#pragma once

#include <stdexcept>
#include <string>

namespace fusioncost {

// A model description (cost law, fusion law, config) that violates its own
// invariants. Raised at construction or parse time.
class InvalidSpec : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An argument outside the mathematical domain of an operation (theta <= 0,
// tau <= 0, a < 1, zero trials, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Tabulated curves are never extrapolated past their last knot.
class ExtrapolationError : public DomainError {
 public:
  using DomainError::DomainError;
};

// The requested route needs a property the cost law does not have, e.g.
// derivatives of a tabulated curve or a threshold for a concave cost.
class UnsupportedRegime : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A root bracket could not be established. Only reachable for malformed
// models whose total cost does not grow without bound.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fusioncost

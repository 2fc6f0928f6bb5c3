#pragma once

#include <stdexcept>
#include <string>

namespace msdpp {

/// Bad input: malformed files, out-of-range parameters, unknown ids.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input outside the mathematical domain of an operation (e.g. logm of a
/// matrix with a non-positive eigenvalue).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Floating-point failure: non-convergence, overflow.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operation was called in a configuration its contract excludes.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace msdpp

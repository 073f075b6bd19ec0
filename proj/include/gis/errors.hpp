#pragma once

#include <stdexcept>
#include <string>

namespace gis {

/// Input outside the admissible domain (bad support, negative weight, ...).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Caller asked for something the operation does not support.
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotPsdError : NumericalError {
  using NumericalError::NumericalError;
};

/// An internal guarantee failed; indicates a bug or an inconsistent result.
struct InvariantViolation : std::logic_error {
  using std::logic_error::logic_error;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace gis

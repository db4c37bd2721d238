#pragma once

#include <stdexcept>
#include <string>

namespace wnc {

/// Malformed input: bad parameters, broken invariants, schema violations.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation (x < 0, p outside (0,1), ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numeric routine failed (non-convergence, overflow). Carries the failing operation.
class NumericError : public std::runtime_error {
 public:
  NumericError(std::string operation, const std::string& what)
      : std::runtime_error(operation + ": " + what), operation_(std::move(operation)) {}

  const std::string& operation() const noexcept { return operation_; }

 private:
  std::string operation_;
};

/// The moment generating function is infinite everywhere it was probed.
class NoExponentialMoment : public NumericError {
 public:
  explicit NoExponentialMoment(std::string operation)
      : NumericError(std::move(operation), "no exponential moment") {}
};

/// Queue drift is nonnegative; no positive Lundberg root exists.
class UnstableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wnc

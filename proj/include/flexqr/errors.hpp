#pragma once

#include <stdexcept>
#include <string>

namespace flexqr {

/// Argument outside the support of a distribution or operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Factorization, quadrature or optimizer failure.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data or configuration that fails validation.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace flexqr

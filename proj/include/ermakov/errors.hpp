#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ermakov {

/// Base class of every exception thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Expression text could not be parsed; carries the byte offset into the source.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t position)
      : Error(message + " (at position " + std::to_string(position) + ")"),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_ = 0;
};

/// Evaluation left the real domain (log of a non-positive value, division by zero, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Adaptive quadrature failed: subdivision cap reached or NaN in the integrand.
class QuadratureError : public Error {
 public:
  using Error::Error;
};

/// Invalid argument, precondition violation, or bad configuration.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// State violates a system form's x != 0 / y != 0 requirement.
class SingularStateError : public Error {
 public:
  using Error::Error;
};

/// Operation requires a conservative autonomous spec.
class NotConservativeError : public Error {
 public:
  using Error::Error;
};

/// A Noether symmetry condition required by the operation does not hold.
class ConditionError : public Error {
 public:
  using Error::Error;
};

/// Integration could not continue; carries the last accepted time and state.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& message, double last_time,
                   std::vector<double> last_state)
      : Error(message), last_time_(last_time), last_state_(std::move(last_state)) {}

  double last_time() const noexcept { return last_time_; }
  const std::vector<double>& last_state() const noexcept { return last_state_; }

 private:
  double last_time_ = 0;
  std::vector<double> last_state_;
};

/// A quantity that must keep its sign changed sign inside the reported bracket.
class ZeroCrossingError : public Error {
 public:
  ZeroCrossingError(const std::string& message, double lo, double hi)
      : Error(message), lo_(lo), hi_(hi) {}

  double bracket_lo() const noexcept { return lo_; }
  double bracket_hi() const noexcept { return hi_; }

 private:
  double lo_ = 0, hi_ = 0;
};

/// The integrand has a turning point (pole) inside the reported bracket.
class TurningPointError : public Error {
 public:
  TurningPointError(const std::string& message, double lo, double hi)
      : Error(message), lo_(lo), hi_(hi) {}

  double bracket_lo() const noexcept { return lo_; }
  double bracket_hi() const noexcept { return hi_; }

 private:
  double lo_ = 0, hi_ = 0;
};

}  // namespace ermakov

#pragma once

#include <stdexcept>
#include <string>

namespace kotta {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid scenario, price book, policy or parameter set.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Text that does not match an expected grammar. Carries the offending token.
class ParseError : public ConfigError {
 public:
  ParseError(const std::string& message, std::string token)
      : ConfigError(message), token_(std::move(token)) {}

  const std::string& token() const noexcept { return token_; }

 private:
  std::string token_;
};

// An event was scheduled before the current virtual clock.
class ClockViolation : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class AccessDenied : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

// A job or state machine was asked to make a transition it does not allow.
class IllegalTransition : public Error {
 public:
  using Error::Error;
};

// The simulation ran past its configured virtual-time budget.
class SimulationGuard : public Error {
 public:
  using Error::Error;
};

}  // namespace kotta

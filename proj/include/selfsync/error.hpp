#pragma once

#include <stdexcept>
#include <string>

namespace selfsync {

// Base for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input violates a documented precondition (negative weight, bad shape, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Operation requires a connectivity class the digraph does not have.
class TopologyError : public Error {
 public:
  using Error::Error;
};

// A numerical check failed (residual too large, non-finite state, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

// A run did not reach the synchronized state within its horizon.
class SyncFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Malformed configuration or scenario document. `line` is 1-based, 0 if unknown.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace selfsync

#pragma once

#include <stdexcept>
#include <string>

namespace negres {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes that do not fit the operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value (learning rate, filter band, spec field, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Dataset content problem: unknown label, missing class, too few patients.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Caller broke an API precondition (non-scalar loss, empty batch, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file; carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  explicit ParseError(const std::string& what) : Error(what) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_ = 0;
};

/// Checkpoint cannot be read or does not match the model it is loaded into.
class CheckpointError : public Error {
 public:
  using Error::Error;
};

}  // namespace negres

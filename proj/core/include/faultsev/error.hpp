#pragma once

#include <stdexcept>
#include <string>

namespace faultsev {

enum class ErrorKind {
  shape,       // operand shapes disagree
  contract,    // precondition violated by the caller
  config,      // invalid run configuration
  data,        // malformed or unusable input data
  divergence,  // training produced a non-finite loss
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error(ErrorKind::shape, what) {}
};

class ContractError : public Error {
 public:
  explicit ContractError(const std::string& what) : Error(ErrorKind::contract, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class DivergenceError : public Error {
 public:
  explicit DivergenceError(const std::string& what) : Error(ErrorKind::divergence, what) {}
};

/// Process exit code for the CLI: 0 success, 1 config, 2 data, 3 divergence.
int exit_code_for(ErrorKind kind);

}  // namespace faultsev

#pragma once

#include <stdexcept>
#include <string>

namespace nhcsr {

// Error taxonomy shared by the library and the CLI. The CLI maps kinds to
// process exit codes: usage -> 2, data -> 3, numeric -> 4.
enum class ErrorKind { usage, data, numeric };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& msg)
      : std::runtime_error(msg), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const { return kind_; }
  const std::string& code() const { return code_; }

  int exit_code() const {
    switch (kind_) {
      case ErrorKind::usage:
        return 2;
      case ErrorKind::data:
        return 3;
      case ErrorKind::numeric:
        return 4;
    }
    return 1;
  }

 private:
  ErrorKind kind_;
  std::string code_;
};

// Tensor extents or grid resolutions do not match an operation's contract.
struct ShapeError : Error {
  explicit ShapeError(const std::string& msg) : Error(ErrorKind::data, "shape", msg) {}
};

// A precondition on values (not extents) was violated by the caller.
struct ContractError : Error {
  explicit ContractError(const std::string& msg) : Error(ErrorKind::data, "contract", msg) {}
};

// Inconsistent run configuration (flags, config keys, resolution pairings).
struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error(ErrorKind::data, "config", msg) {}
};

// File format or filesystem failure.
struct IoError : Error {
  explicit IoError(const std::string& msg) : Error(ErrorKind::data, "io", msg) {}
};

struct NumericError : Error {
  explicit NumericError(const std::string& msg) : Error(ErrorKind::numeric, "numeric", msg) {}
  NumericError(std::string code, const std::string& msg)
      : Error(ErrorKind::numeric, std::move(code), msg) {}
};

// Iterative solver ran out of iterations; carries the last residual seen.
struct ConvergenceError : NumericError {
  ConvergenceError(const std::string& msg, double residual)
      : NumericError("convergence", msg), final_residual(residual) {}
  double final_residual;
};

struct UsageError : Error {
  explicit UsageError(const std::string& msg) : Error(ErrorKind::usage, "usage", msg) {}
};

}  // namespace nhcsr

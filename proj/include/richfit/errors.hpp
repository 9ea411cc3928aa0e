// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace richfit {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  /// Short machine-readable category used in CLI error payloads.
  [[nodiscard]] virtual const char* kind() const noexcept { return "error"; }
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
  [[nodiscard]] const char* kind() const noexcept override { return "invalid_parameter"; }
};

class DomainError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] const char* kind() const noexcept override { return "domain_error"; }
};

class DimensionError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] const char* kind() const noexcept override { return "dimension_error"; }
};

/// Malformed or inconsistent input data (schema, rows, values).
class DataError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] const char* kind() const noexcept override { return "data_error"; }
};

class SchemaError : public DataError {
 public:
  using DataError::DataError;
  [[nodiscard]] const char* kind() const noexcept override { return "schema_error"; }
};

class RowError : public DataError {
 public:
  RowError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  [[nodiscard]] std::size_t line() const noexcept { return line_; }
  [[nodiscard]] const char* kind() const noexcept override { return "row_error"; }

 private:
  std::size_t line_;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
  [[nodiscard]] const char* kind() const noexcept override { return "insufficient_data"; }
};

/// Raised when no start converged; carries the best parameter vector found.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, std::vector<double> best_theta, double best_loglik)
      : Error(what), best_theta_(std::move(best_theta)), best_loglik_(best_loglik) {}
  [[nodiscard]] const std::vector<double>& best_theta() const noexcept { return best_theta_; }
  [[nodiscard]] double best_loglik() const noexcept { return best_loglik_; }
  [[nodiscard]] const char* kind() const noexcept override { return "non_convergence"; }

 private:
  std::vector<double> best_theta_;
  double best_loglik_;
};

}  // namespace richfit

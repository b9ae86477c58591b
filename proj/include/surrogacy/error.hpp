#pragma once

#include <stdexcept>
#include <string>

namespace surrogacy {

// Error classes map one-to-one onto CLI exit codes (see exit_code()).
enum class ErrorKind {
  schema = 2,      // malformed CSV header
  validation = 3,  // bad cell, invariant violation, underivable label
  degenerate = 4,  // analysis input cannot support the requested statistic
  internal = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

class SchemaError : public Error {
 public:
  SchemaError(std::string column, const std::string& what)
      : Error(ErrorKind::schema, what), column_(std::move(column)) {}
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

// A cell that cannot be parsed as the column's type. `row` is 1-based over data rows.
class RowParseError : public ValidationError {
 public:
  RowParseError(std::size_t row, std::string column, const std::string& what)
      : ValidationError(what), row_(row), column_(std::move(column)) {}
  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

class LabelError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DegenerateError : public Error {
 public:
  explicit DegenerateError(const std::string& what) : Error(ErrorKind::degenerate, what) {}
};

class EmptyInputError : public DegenerateError {
 public:
  using DegenerateError::DegenerateError;
};

// Size mismatches between parallel inputs. Caller bugs rather than data
// problems, so they report as internal.
class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error(ErrorKind::internal, what) {}
};

// Wraps an error with the pipeline stage that raised it, keeping its kind.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(cause.kind(), stage + ": " + cause.what()), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace surrogacy

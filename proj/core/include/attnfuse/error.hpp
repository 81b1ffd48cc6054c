#pragma once

#include <stdexcept>
#include <string>

namespace attnfuse {

/// Broad failure category. Each maps to one CLI exit code.
enum class ErrorKind {
  config,   // bad flags, bad config file, invalid hyperparameters
  data,     // schema, parse, label-domain, stratification, dimension problems
  numeric,  // non-finite values produced or found inside models
};

/// Finer diagnostic tag for data errors so callers can tell failures apart
/// without string matching.
enum class DataIssue {
  none,
  empty_input,
  missing_column,
  non_numeric,
  label_domain,
  non_finite,
  degenerate_labels,
  stratification,
  dimension,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, DataIssue issue = DataIssue::none)
      : std::runtime_error(what), kind_(kind), issue_(issue) {}

  ErrorKind kind() const noexcept { return kind_; }
  DataIssue issue() const noexcept { return issue_; }

 private:
  ErrorKind kind_;
  DataIssue issue_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class DataError : public Error {
 public:
  DataError(DataIssue issue, const std::string& what) : Error(ErrorKind::data, what, issue) {}
};

/// Argument-length or column-count mismatch between collaborating objects.
class DimensionError : public DataError {
 public:
  explicit DimensionError(const std::string& what) : DataError(DataIssue::dimension, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorKind::numeric, what) {}
};

/// Process exit code for a failure category: 2 config, 3 data, 4 numeric.
constexpr int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::config: return 2;
    case ErrorKind::data: return 3;
    case ErrorKind::numeric: return 4;
  }
  return 1;
}

const char* to_string(DataIssue issue) noexcept;

}  // namespace attnfuse

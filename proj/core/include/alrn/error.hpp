#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace alrn {

// Broad failure classes. The CLI maps them onto process exit codes.
enum class ErrorCategory {
  io,          // unreadable/unwritable files, malformed input files
  config,      // invalid configuration values
  validation,  // a precondition on arguments or data was violated
  backend,     // labeler backend failures (transport, auth, parse)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error(ErrorCategory::io, message) {}
};

// A malformed record in an input file; line is 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error(ErrorCategory::config, message) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message)
      : Error(ErrorCategory::validation, message) {}
};

class ShapeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Test data overlaps the data a checkpoint was trained on.
class ContaminationError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class BackendError : public Error {
 public:
  explicit BackendError(const std::string& message) : Error(ErrorCategory::backend, message) {}
};

// Authentication or configuration failure of a backend; aborts a labeling run
// instead of being retried.
class BackendFatalError : public BackendError {
 public:
  using BackendError::BackendError;
};

// Checkpoint integrity failures. Each has its own type so callers can tell a
// version problem from a damaged file.
class CheckpointError : public Error {
 public:
  explicit CheckpointError(const std::string& message) : Error(ErrorCategory::io, message) {}
};

class CheckpointVersionError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

class CheckpointTruncatedError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

class CheckpointLengthError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

class CheckpointDigestError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

// Process exit code for an error category: 1 io/config, 2 validation, 3 backend.
int exit_code(ErrorCategory category) noexcept;

}  // namespace alrn

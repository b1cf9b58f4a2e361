#pragma once

#include <stdexcept>
#include <string>

namespace converge {

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An input document or value violates a type invariant. `record` names the
/// offending record (presentation id, viewpoint id, ...) when there is one.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& message, std::string record = {})
      : Error(record.empty() ? message : message + " [" + record + "]"),
        record_(std::move(record)) {}
  const std::string& record() const noexcept { return record_; }

 private:
  std::string record_;
};

/// A write collides with state that already exists, such as a second vote
/// by the same reviewer.
class ConflictError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Transport-level provider failure. Retryable.
class ProviderError : public Error {
 public:
  using Error::Error;
};

/// Provider answered, but the answer does not fit the declared schema.
class SchemaError : public Error {
 public:
  SchemaError(const std::string& message, std::string raw_response)
      : Error(message), raw_(std::move(raw_response)) {}
  const std::string& raw_response() const noexcept { return raw_; }

 private:
  std::string raw_;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

/// Wraps an error raised inside a pipeline stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message)
      : Error(stage + ": " + message), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace converge

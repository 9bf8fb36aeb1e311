#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace strata {

// Base of every error raised by the engine. Operations that throw leave the
// object they were called on unchanged.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input data: ragged CSV rows, bad descriptors, invalid UTF-8.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Unknown column, row or group id.
class LookupError : public Error {
 public:
  using Error::Error;
};

// Invalid mapping domain or value outside a mapping's definition.
class DomainError : public Error {
 public:
  using Error::Error;
};

class FilterError : public Error {
 public:
  using Error::Error;
};

// A mutation that is not legal for the current table state.
class StateError : public Error {
 public:
  using Error::Error;
};

// Statistics requested over an input with no non-missing values.
class StatsError : public Error {
 public:
  using Error::Error;
};

class SceneError : public Error {
 public:
  using Error::Error;
};

// Structurally invalid protocol or state document.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Parse failure of a scripted-column expression. `offset` is the byte offset
// into the source where the problem was detected.
class ScriptError : public Error {
 public:
  ScriptError(const std::string& message, std::size_t offset)
      : Error(message + " at offset " + std::to_string(offset)), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace strata

#pragma once

#include <stdexcept>
#include <string>

namespace disent {

// Base of every error thrown by the library. `kind()` is the stable tag used
// in the CLI's error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

// Malformed input: shapes, probabilities, labels, configuration values.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error("validation", what) {}
};

// Bad configuration entry; `key()` names it.
class ConfigError : public ValidationError {
 public:
  ConfigError(std::string key, const std::string& what)
      : ValidationError("config key '" + key + "': " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

// Mathematical precondition violated (alpha <= 1, absolute continuity).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error("domain", what) {}
};

// Object used in the wrong lifecycle state (backward before forward, untrained critic).
class StateError : public Error {
 public:
  explicit StateError(const std::string& what) : Error("state", what) {}
};

// Non-finite loss or gradient.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error("numeric", what) {}
};

}  // namespace disent

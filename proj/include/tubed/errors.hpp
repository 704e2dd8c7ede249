#pragma once

#include <stdexcept>
#include <string>

namespace tubed {

/// Base of every error raised by the library. `module()` names the
/// component that raised it so the CLI can report a structured payload.
class Error : public std::runtime_error {
 public:
  Error(std::string module, std::string kind, const std::string& what)
      : std::runtime_error(module + ": " + what), module_(std::move(module)), kind_(std::move(kind)) {}

  const std::string& module() const noexcept { return module_; }
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string module_;
  std::string kind_;
};

/// Invalid coordinates or parameters for a model.
class DomainError : public Error {
 public:
  DomainError(std::string module, const std::string& what) : Error(std::move(module), "domain", what) {}
};

/// Argument outside the region where an operation is defined (e.g. log map
/// beyond the injectivity radius).
class RangeError : public Error {
 public:
  RangeError(std::string module, const std::string& what) : Error(std::move(module), "range", what) {}
};

/// Work or memory estimate exceeds a configured budget.
class ResourceError : public Error {
 public:
  ResourceError(std::string module, const std::string& what, double required = 0.0)
      : Error(std::move(module), "resource", what), required_(required) {}
  double required() const noexcept { return required_; }

 private:
  double required_;
};

class PreconditionError : public Error {
 public:
  PreconditionError(std::string module, const std::string& what)
      : Error(std::move(module), "precondition", what) {}
};

class ConfigurationError : public Error {
 public:
  ConfigurationError(std::string module, const std::string& what)
      : Error(std::move(module), "configuration", what) {}
};

/// Evaluation point not covered by any ball of a partition of unity.
class CoverageError : public Error {
 public:
  CoverageError(std::string module, const std::string& what) : Error(std::move(module), "coverage", what) {}
};

class NumericError : public Error {
 public:
  NumericError(std::string module, const std::string& what) : Error(std::move(module), "numeric", what) {}
};

/// Malformed input data (files, vertex ids out of range, ...).
class InputError : public Error {
 public:
  InputError(std::string module, const std::string& what) : Error(std::move(module), "input", what) {}
};

}  // namespace tubed

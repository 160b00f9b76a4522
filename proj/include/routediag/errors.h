#pragma once

#include <stdexcept>
#include <string>

namespace routediag {

// Base for every error raised by the library. Subclasses map onto the
// CLI exit-code contract: usage/schema problems exit 2, domain failures 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (Solomon rows, JSON documents).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), _line(line) {}
  explicit ParseError(const std::string& what) : Error(what), _line(0) {}

  std::size_t line() const { return _line; }

 private:
  std::size_t _line;
};

// Input that is well-formed but structurally unusable (missing depot,
// unknown parameter path, ...).
class StructuralError : public Error {
 public:
  using Error::Error;
};

class BoundsError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// JSON document that does not match its schema. `path` names the
// offending field, e.g. "constraints[1].Q".
class SchemaError : public Error {
 public:
  SchemaError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), _path(path) {}

  const std::string& path() const { return _path; }

 private:
  std::string _path;
};

// External chat endpoint unreachable, timed out or answered with an error.
class TransportError : public Error {
 public:
  using Error::Error;
};

class EvaluationError : public Error {
 public:
  using Error::Error;
};

class UnsupportedConstraintError : public Error {
 public:
  using Error::Error;
};

// A diagnosis strategy could not produce any adjustment for a violated
// family because the whitelist excludes all of its parameters.
class InfeasibleDiagnosisError : public Error {
 public:
  using Error::Error;
};

}  // namespace routediag

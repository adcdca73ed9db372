#pragma once

#include <stdexcept>
#include <string>

namespace expcopilot {

// Base class for every error raised by the library. The CLI maps the
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration, missing files, schema violations in user input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A data file failed validation. Carries the 1-based line number when the
// file is line-delimited (0 otherwise).
class LoadError : public ConfigError {
 public:
  LoadError(const std::string& file, std::size_t line, const std::string& what)
      : ConfigError(file + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A value violates the bounds of its solution space.
class OutOfSpaceError : public Error {
 public:
  using Error::Error;
};

// Transport, auth or replay failures in an LLM backend.
class BackendError : public Error {
 public:
  using Error::Error;
};

// The LLM response could not be turned into configurations.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Prompt sections do not fit in the configured token budget.
class BudgetError : public Error {
 public:
  using Error::Error;
};

}  // namespace expcopilot

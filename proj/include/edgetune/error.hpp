#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace edgetune {

/// Malformed or inconsistent input data (tables, logs, weight files).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A located failure while parsing a text stream. `line()` is 1-based.
class ParseError : public DataError {
 public:
  ParseError(std::string source, std::size_t line, const std::string& what)
      : DataError(source + ":" + std::to_string(line) + ": " + what),
        source_(std::move(source)),
        line_(line) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

/// No (batch size, frequency) pair satisfies the power cap.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError() : std::runtime_error("no configuration satisfies power cap") {}
  using std::runtime_error::runtime_error;
};

/// Bad command-line usage.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace edgetune

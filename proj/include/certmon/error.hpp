#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace certmon {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: malformed formulas, configs, mismatched shapes.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public ValidationError {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column)
      : ValidationError(message + " at line " + std::to_string(line) + ", column " +
                        std::to_string(column)),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// A formula could not be decomposed into atoms of the dictionary.
class NotInFragment : public ValidationError {
 public:
  NotInFragment(const std::string& offending)
      : ValidationError("not in fragment: subformula '" + offending +
                        "' is not a dictionary atom"),
        offending_(offending) {}

  const std::string& offending() const { return offending_; }

 private:
  std::string offending_;
};

class TimeOutOfRange : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class HorizonExceeded : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DimensionMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace certmon

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fieldnorm {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed input stream. Line numbers are 1-based and count the header line.
class ParseError : public Error {
public:
  ParseError(std::size_t line, const std::string& message)
      : Error("line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

// Valid syntax but invalid content: unknown cell, zero mean, degenerate fit, ...
class DataError : public Error {
public:
  using Error::Error;
};

// Aggregation refused: the score set's linearity class makes sums and means invalid.
class GuardRefusal : public Error {
public:
  GuardRefusal(std::string method, std::string linearity_class)
      : Error("aggregation refused: '" + method + "' scores are " + linearity_class +
              "; such normalized citation scores cannot be added or averaged"),
        method_(std::move(method)),
        linearity_class_(std::move(linearity_class)) {}

  const std::string& method() const { return method_; }
  const std::string& linearity_class() const { return linearity_class_; }

private:
  std::string method_;
  std::string linearity_class_;
};

}  // namespace fieldnorm

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace odmwatch {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input row. line() is 1-based and counts the header.
class ParseError : public Error {
 public:
  ParseError(std::string source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what),
        source_(std::move(source)),
        line_(line) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

// Structurally valid input that violates a matrix invariant (duplicate cell).
class IntegrityError : public Error {
 public:
  using Error::Error;
};

class StoreError : public Error {
 public:
  using Error::Error;
};

// Invalid synthetic-data specification.
class SpecError : public Error {
 public:
  using Error::Error;
};

}  // namespace odmwatch

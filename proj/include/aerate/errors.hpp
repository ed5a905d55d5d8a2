#pragma once

#include <stdexcept>
#include <string>

namespace aerate {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

// Both inputs of an optimal-allocation formula were zero.
class DegenerateInputError : public DomainError {
 public:
  using DomainError::DomainError;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

// A prediction was requested for an arm that has no samples yet.
class ColdArmError : public Error {
 public:
  explicit ColdArmError(int arm)
      : Error("cold arm: no samples stored for arm " + std::to_string(arm)), arm_(arm) {}
  int arm() const noexcept { return arm_; }

 private:
  int arm_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Internal invariant violated; indicates a bug rather than bad input.
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace aerate

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace aopkit {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class InvalidClass : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed file content. `offset()` is the byte position of the problem.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class TruncationError : public ParseError {
 public:
  using ParseError::ParseError;
};

/// Well-formed file whose content breaks a type invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class NoTangent : public Error {
 public:
  using Error::Error;
};

class NoEdges : public Error {
 public:
  using Error::Error;
};

class EmptyShape : public Error {
 public:
  using Error::Error;
};

class MissingStructure : public Error {
 public:
  using Error::Error;
};

class OverlapError : public Error {
 public:
  using Error::Error;
};

class UndefinedMetric : public Error {
 public:
  using Error::Error;
};

class InfeasibleRequest : public Error {
 public:
  using Error::Error;
};

}  // namespace aopkit

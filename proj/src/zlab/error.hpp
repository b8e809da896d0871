#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace zlab {

enum class ErrorKind {
  InvalidArgument,
  MalformedLine,
  NonMonotonicTimestamp,
  EmptyTrace,
  InvalidTrace,
  InsufficientClasses,
  LengthMismatch,
  EmptySequence,
  EmptyInput,
  TooFewPairs,
  SameUser,
  Config,
  Io,
  MissingArtifact,
  Internal,
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, std::size_t line = 0)
      : std::runtime_error(what), kind_(kind), line_(line) {}

  ErrorKind kind() const { return kind_; }
  // 1-based line number for parse errors, 0 otherwise.
  std::size_t line() const { return line_; }

 private:
  ErrorKind kind_;
  std::size_t line_;
};

}  // namespace zlab

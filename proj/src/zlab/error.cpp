#include "zlab/error.hpp"

namespace zlab {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::MalformedLine: return "malformed-line";
    case ErrorKind::NonMonotonicTimestamp: return "non-monotonic-timestamp";
    case ErrorKind::EmptyTrace: return "empty-trace";
    case ErrorKind::InvalidTrace: return "invalid-trace";
    case ErrorKind::InsufficientClasses: return "insufficient-classes";
    case ErrorKind::LengthMismatch: return "length-mismatch";
    case ErrorKind::EmptySequence: return "empty-sequence";
    case ErrorKind::EmptyInput: return "empty-input";
    case ErrorKind::TooFewPairs: return "too-few-pairs";
    case ErrorKind::SameUser: return "same-user";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
    case ErrorKind::MissingArtifact: return "missing-artifact";
    case ErrorKind::Internal: return "internal";
  }
  return "unknown";
}

}  // namespace zlab

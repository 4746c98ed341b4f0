#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace patrol {

/// Stable error codes. The string form is part of the CLI diagnostics and the
/// service error bodies, so renaming one is a breaking change.
enum class ErrorCode {
  kMalformedDocument,
  kUnknownReference,
  kRowNotStochastic,
  kDuplicateId,
  kOrderMismatch,
  kNotIrreducible,
  kNoConvergence,
  kUnreachable,
  kCursorOutOfRange,
  kInvalidArgument,
  kSessionNotFound,
  kCancelled,
  kIo,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::string subject = {},
        double value = 0.0, bool has_value = false)
      : std::runtime_error(std::move(message)),
        code_(code),
        subject_(std::move(subject)),
        value_(value),
        has_value_(has_value) {}

  ErrorCode code() const noexcept { return code_; }
  // The offending id (node, location, session), if any.
  const std::string& subject() const noexcept { return subject_; }
  bool has_value() const noexcept { return has_value_; }
  double value() const noexcept { return value_; }

 private:
  ErrorCode code_;
  std::string subject_;
  double value_;
  bool has_value_;
};

}  // namespace patrol

#include "patrol/error.hpp"

namespace patrol {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kMalformedDocument: return "MALFORMED_DOCUMENT";
    case ErrorCode::kUnknownReference: return "UNKNOWN_REFERENCE";
    case ErrorCode::kRowNotStochastic: return "ROW_NOT_STOCHASTIC";
    case ErrorCode::kDuplicateId: return "DUPLICATE_ID";
    case ErrorCode::kOrderMismatch: return "ORDER_MISMATCH";
    case ErrorCode::kNotIrreducible: return "NOT_IRREDUCIBLE";
    case ErrorCode::kNoConvergence: return "NO_CONVERGENCE";
    case ErrorCode::kUnreachable: return "UNREACHABLE";
    case ErrorCode::kCursorOutOfRange: return "CURSOR_OUT_OF_RANGE";
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::kSessionNotFound: return "SESSION_NOT_FOUND";
    case ErrorCode::kCancelled: return "CANCELLED";
    case ErrorCode::kIo: return "IO_ERROR";
  }
  return "UNKNOWN";
}

}  // namespace patrol

#include "lexfuse/error.hpp"

namespace lexfuse {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "invalid-input";
    case ErrorKind::kNotFound: return "not-found";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kStaleIndex: return "stale-index";
    case ErrorKind::kBuild: return "build";
    case ErrorKind::kProtocol: return "protocol";
    case ErrorKind::kRetryable: return "retryable";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

bool is_validation_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput:
    case ErrorKind::kNotFound:
    case ErrorKind::kParse:
    case ErrorKind::kConfig:
    case ErrorKind::kStaleIndex:
      return true;
    default:
      return false;
  }
}

}  // namespace lexfuse

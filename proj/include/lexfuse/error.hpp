#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lexfuse {

enum class ErrorKind {
  kInvalidInput,  // bad argument or record content
  kNotFound,
  kParse,         // malformed file or stream
  kConfig,        // invalid configuration or template
  kStaleIndex,    // index does not belong to the supplied corpus
  kBuild,         // index cannot be built from this corpus
  kProtocol,      // remote service replied with something we cannot use
  kRetryable,     // transport failure, safe to retry
  kIo,
};

std::string_view to_string(ErrorKind kind);

// Every library failure is reported as an Error. The kind drives the CLI
// exit code; the message is meant for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  // Same kind, message prefixed with the stage that failed.
  Error in_stage(std::string_view stage) const {
    return Error(kind_, "stage '" + std::string(stage) + "': " + what());
  }

 private:
  ErrorKind kind_;
};

// Returns true for errors caused by user-supplied input or configuration,
// false for environment/runtime failures.
bool is_validation_error(ErrorKind kind);

}  // namespace lexfuse

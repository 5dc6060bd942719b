#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hapstack {

enum class ErrorCode {
  kIo,
  kDuplicateToken,
  kMissingSpecialToken,
  kInvalidConfig,
  kIdOutOfRange,
  kSequenceTooLong,
  kInconsistentBatch,
  kShapeMismatch,
  kBadMagic,
  kTruncated,
  kCorrupt,
  kNonFinite,
  kMissingScore,
  kEmptyInput,
  kInvalidArgument,
};

std::string_view to_string(ErrorCode code);

// All recoverable failures in the library surface as this exception; callers
// dispatch on code() rather than parsing the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hapstack

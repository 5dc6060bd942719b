#include "hapstack/error.hpp"

namespace hapstack {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kDuplicateToken: return "DuplicateToken";
    case ErrorCode::kMissingSpecialToken: return "MissingSpecialToken";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kIdOutOfRange: return "IdOutOfRange";
    case ErrorCode::kSequenceTooLong: return "SequenceTooLong";
    case ErrorCode::kInconsistentBatch: return "InconsistentBatch";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kTruncated: return "Truncated";
    case ErrorCode::kCorrupt: return "Corrupt";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kMissingScore: return "MissingScore";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace hapstack

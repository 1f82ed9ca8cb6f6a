#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ppx {

enum class ErrorCode {
  kInvalidInput,
  kIo,
  kEmptyTaxonomy,
  kDuplicateCode,
  kDanglingParent,
  kCycle,
  kLevelMismatch,
  kUnknownLabel,
  kNonEdge,
  kMalformedRecord,
  kEmptyLabelSet,
  kDuplicateSegment,
  kOverlappingSplits,
  kExemplarShortfall,
  kEmptySegment,
  kPrecondition,
  kUnparseableOutput,
  kRetriesExhausted,
  kClientError,
  kIdMismatch,
  kLabelSetMismatch,
  kUnequalRaters,
  kNotFound,
  kConflict,
};

std::string_view to_string(ErrorCode code);

// All recoverable failures in the toolkit surface as ppx::Error.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ppx

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace curation {

// Every failure the library reports carries one of these codes. Callers that
// need to branch (the HTTP layer mapping to status codes, batch search
// reporting per-element errors) switch on the code, not on the message.
enum class ErrorCode {
  kUnsupportedFormat,
  kCorruptHeader,
  kInvalidMeta,
  kBandTooWide,
  kEmptyImage,
  kEncodeFailure,
  kDecodeFailure,
  kProviderUnavailable,
  kEmptyText,
  kDimensionMismatch,
  kDegenerateAggregate,
  kEmptyIndex,
  kIndexNotBuilt,
  kInsufficientCandidates,
  kInvalidQuery,
  kUnknownRecordInGroup,
  kNoSignal,
  kUnknownCategory,
  kInvalidPatch,
  kWouldInvalidate,
  kInvalidCaption,
  kVersionConflict,
  kInvalidSchema,
  kNonMonotoneProfiles,
  kEmptyCorpus,
  kInsufficientData,
  kNoPositives,
  kNotFound,
  kConflict,
  kInvalidConfig,
  kIoError,
  kParseError,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace curation

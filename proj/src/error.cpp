#include "curation/error.hpp"

namespace curation {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::kCorruptHeader: return "CorruptHeader";
    case ErrorCode::kInvalidMeta: return "InvalidMeta";
    case ErrorCode::kBandTooWide: return "BandTooWide";
    case ErrorCode::kEmptyImage: return "EmptyImage";
    case ErrorCode::kEncodeFailure: return "EncodeFailure";
    case ErrorCode::kDecodeFailure: return "DecodeFailure";
    case ErrorCode::kProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::kEmptyText: return "EmptyText";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kDegenerateAggregate: return "DegenerateAggregate";
    case ErrorCode::kEmptyIndex: return "EmptyIndex";
    case ErrorCode::kIndexNotBuilt: return "IndexNotBuilt";
    case ErrorCode::kInsufficientCandidates: return "InsufficientCandidates";
    case ErrorCode::kInvalidQuery: return "InvalidQuery";
    case ErrorCode::kUnknownRecordInGroup: return "UnknownRecordInGroup";
    case ErrorCode::kNoSignal: return "NoSignal";
    case ErrorCode::kUnknownCategory: return "UnknownCategory";
    case ErrorCode::kInvalidPatch: return "InvalidPatch";
    case ErrorCode::kWouldInvalidate: return "WouldInvalidate";
    case ErrorCode::kInvalidCaption: return "InvalidCaption";
    case ErrorCode::kVersionConflict: return "VersionConflict";
    case ErrorCode::kInvalidSchema: return "InvalidSchema";
    case ErrorCode::kNonMonotoneProfiles: return "NonMonotoneProfiles";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kNoPositives: return "NoPositives";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kConflict: return "Conflict";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace curation

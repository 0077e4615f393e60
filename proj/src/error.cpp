#include "imp/error.h"

namespace imp {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidDesign: return "InvalidDesign";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kOversizedElement: return "OversizedElement";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kEmptyAnnotationSet: return "EmptyAnnotationSet";
    case ErrorCode::kEmptyMask: return "EmptyMask";
    case ErrorCode::kConstantTruth: return "ConstantTruth";
    case ErrorCode::kEndpointUnreachable: return "EndpointUnreachable";
    case ErrorCode::kMalformedResponse: return "MalformedResponse";
    case ErrorCode::kTimeout: return "Timeout";
    case ErrorCode::kGenomeLengthMismatch: return "GenomeLengthMismatch";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kCancelled: return "Cancelled";
    case ErrorCode::kCountMismatch: return "CountMismatch";
    case ErrorCode::kNoTemplateForCount: return "NoTemplateForCount";
    case ErrorCode::kUnknownSentinel: return "UnknownSentinel";
    case ErrorCode::kStorageUnavailable: return "StorageUnavailable";
    case ErrorCode::kCorruptRecord: return "CorruptRecord";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kConflict: return "Conflict";
  }
  return "Unknown";
}

}  // namespace imp

#include "causalmine/error.h"

namespace causalmine {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kMalformedInput: return "malformed_input";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kUndefinedSimilarity: return "undefined_similarity";
    case ErrorCode::kUnknownPhrase: return "unknown_phrase";
    case ErrorCode::kAllTokensUnknown: return "all_tokens_unknown";
    case ErrorCode::kProviderUnavailable: return "provider_unavailable";
    case ErrorCode::kClassificationIncomplete: return "classification_incomplete";
    case ErrorCode::kEnrichmentIncomplete: return "enrichment_incomplete";
    case ErrorCode::kPreconditionFailed: return "precondition_failed";
    case ErrorCode::kConflict: return "conflict";
    case ErrorCode::kIo: return "io_error";
  }
  return "unknown";
}

}  // namespace causalmine

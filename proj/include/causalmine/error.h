#ifndef CAUSALMINE_ERROR_H_
#define CAUSALMINE_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace causalmine {

enum class ErrorCode {
  kInvalidArgument,
  kMalformedInput,
  kNotFound,
  kDimensionMismatch,
  kUndefinedSimilarity,
  kUnknownPhrase,
  kAllTokensUnknown,
  kProviderUnavailable,
  kClassificationIncomplete,
  kEnrichmentIncomplete,
  kPreconditionFailed,
  kConflict,
  kIo,
};

std::string_view error_code_name(ErrorCode code);

// Every failure raised by the library carries a machine-readable code so the
// CLI and HTTP layers can map it to exit statuses and response codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace causalmine

#endif  // CAUSALMINE_ERROR_H_

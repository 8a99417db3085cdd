#include "error.hpp"

namespace genheck {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kDomainError: return "DomainError";
    case ErrorCode::kNonConvergence: return "NonConvergence";
    case ErrorCode::kSingularInformation: return "SingularInformation";
    case ErrorCode::kMissingCensoring: return "MissingCensoring";
    case ErrorCode::kNotConverged: return "NotConverged";
    case ErrorCode::kNotNested: return "NotNested";
    case ErrorCode::kSingularCovariance: return "SingularCovariance";
    case ErrorCode::kInvalidScenario: return "InvalidScenario";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kValueError: return "ValueError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace genheck

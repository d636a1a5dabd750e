#include "hierglm/error.hpp"

namespace hierglm {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyData: return "EmptyData";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::OutOfSupport: return "OutOfSupport";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::InvalidProfile: return "InvalidProfile";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::AdaptationFailed: return "AdaptationFailed";
    case ErrorCode::TooFewDraws: return "TooFewDraws";
    case ErrorCode::MismatchedData: return "MismatchedData";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace hierglm

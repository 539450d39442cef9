#include "intfb/error.hpp"

namespace intfb {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kAsymmetricNeighbors: return "ASYMMETRIC_NEIGHBORS";
    case ErrorCode::kIndexOutOfRange: return "INDEX_OUT_OF_RANGE";
    case ErrorCode::kDisconnectedGraph: return "DISCONNECTED_GRAPH";
    case ErrorCode::kDimensionMismatch: return "DIMENSION_MISMATCH";
    case ErrorCode::kBNotInImage: return "B_NOT_IN_IMAGE";
    case ErrorCode::kInfeasible: return "INFEASIBLE";
    case ErrorCode::kNoDescent: return "NO_DESCENT";
    case ErrorCode::kMaxIters: return "MAX_ITERS";
    case ErrorCode::kMultiplierFailure: return "MULTIPLIER_FAILURE";
    case ErrorCode::kInsufficientSamples: return "INSUFFICIENT_SAMPLES";
    case ErrorCode::kStepUnderflow: return "STEP_UNDERFLOW";
    case ErrorCode::kGenerationFailed: return "GENERATION_FAILED";
    case ErrorCode::kInvalidConfig: return "INVALID_CONFIG";
    case ErrorCode::kIo: return "IO_ERROR";
  }
  return "UNKNOWN";
}

namespace {
std::string format_message(ErrorCode code, const std::string& what, const std::string& stage) {
  std::string msg = to_string(code);
  if (!stage.empty()) msg = "[" + stage + "] " + msg;
  if (!what.empty()) msg += ": " + what;
  return msg;
}
}  // namespace

Error::Error(ErrorCode code, const std::string& what, std::string stage)
    : std::runtime_error(format_message(code, what, stage)), code_(code), detail_(what), stage_(std::move(stage)) {}

}  // namespace intfb

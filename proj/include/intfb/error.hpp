#pragma once

#include <stdexcept>
#include <string>

namespace intfb {

enum class ErrorCode {
  kAsymmetricNeighbors,
  kIndexOutOfRange,
  kDisconnectedGraph,
  kDimensionMismatch,
  kBNotInImage,
  kInfeasible,
  kNoDescent,
  kMaxIters,
  kMultiplierFailure,
  kInsufficientSamples,
  kStepUnderflow,
  kGenerationFailed,
  kInvalidConfig,
  kIo,
};

const char* to_string(ErrorCode code);

// All library failures are reported through this type. The stage field is
// filled in by the experiment harness when an error crosses a pipeline stage.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, std::string stage = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& stage() const noexcept { return stage_; }
  const std::string& detail() const noexcept { return detail_; }

  Error with_stage(std::string stage) const { return Error(code_, detail_, std::move(stage)); }

 private:
  ErrorCode code_;
  std::string detail_;
  std::string stage_;
};

}  // namespace intfb

#pragma once

#include <stdexcept>
#include <string>

namespace lrdh {

// Stable numeric values: mirrored one-to-one by lrdh_status in lrdh.h.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kCirculantEmbeddingFailure = 2,
  kCholeskyFailure = 3,
  kQuadratureUnstable = 4,
  kRankNotFound = 5,
  kTransformOverflow = 6,
  kDegenerateFit = 7,
  kGridMismatch = 8,
  kCoverageError = 9,
  kOverflowGuard = 10,
  kEmptySample = 11,
  kNonPositiveData = 12,
  kTooFewSamples = 13,
  kZeroMass = 14,
  kConfigError = 15,
  kIoError = 16,
  kInternal = 99,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorCode::kInvalidArgument, what);
}

}  // namespace lrdh

#pragma once

#include <stdexcept>
#include <string>

namespace tdd_tru {

enum class ErrorCode {
  kInvalidParameter,
  kTailNotConverged,
  kNoBaseStation,
  kInsufficientSamples,
  kIo,
};

const char* ToString(ErrorCode code);

// Single exception type for the library; callers switch on code().
class TruError : public std::runtime_error {
 public:
  TruError(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void ThrowInvalid(const std::string& what) {
  throw TruError(ErrorCode::kInvalidParameter, what);
}

}  // namespace tdd_tru

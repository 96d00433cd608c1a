#include "tdd_tru/params.hpp"

#include <cmath>

#include <fmt/core.h>

#include "tdd_tru/error.hpp"

namespace tdd_tru {

const char* ToString(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidParameter: return "invalid-parameter";
    case ErrorCode::kTailNotConverged: return "tail-not-converged";
    case ErrorCode::kNoBaseStation: return "no-bs";
    case ErrorCode::kInsufficientSamples: return "insufficient-samples";
    case ErrorCode::kIo: return "io-error";
  }
  return "unknown";
}

namespace {

void RequirePositive(double value, const char* name) {
  if (!std::isfinite(value) || value <= 0.0) {
    ThrowInvalid(fmt::format("{} must be finite and > 0 (got {})", name, value));
  }
}

}  // namespace

void NetworkParams::Validate() const {
  RequirePositive(lambda, "lambda");
  RequirePositive(rho, "rho");
  RequirePositive(q, "q");
}

void TrafficFrameParams::Validate() const {
  if (!std::isfinite(p_dl) || p_dl < 0.0 || p_dl > 1.0) {
    ThrowInvalid(fmt::format("p_dl must lie in [0, 1] (got {})", p_dl));
  }
  if (frame_len < 1) {
    ThrowInvalid(fmt::format("frame_len must be >= 1 (got {})", frame_len));
  }
  if (static_dl_subframes < 0 || static_dl_subframes > frame_len) {
    ThrowInvalid(fmt::format("static DL subframes must lie in [0, {}] (got {})",
                             frame_len, static_dl_subframes));
  }
}

void TailPolicy::Validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    ThrowInvalid(fmt::format("tail epsilon must lie in (0, 1) (got {})", epsilon));
  }
  if (k_max < 1) {
    ThrowInvalid(fmt::format("k_max must be >= 1 (got {})", k_max));
  }
}

const char* ToString(DuplexMode mode) {
  return mode == DuplexMode::kDynamic ? "dynamic" : "static";
}

DuplexMode ParseDuplexMode(const std::string& text) {
  if (text == "dynamic") return DuplexMode::kDynamic;
  if (text == "static") return DuplexMode::kStatic;
  ThrowInvalid(fmt::format("unknown TDD mode '{}' (expected dynamic|static)", text));
}

}  // namespace tdd_tru

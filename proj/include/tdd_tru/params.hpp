#pragma once

#include <cstdint>
#include <string>

namespace tdd_tru {

/// Spatial densities of the small-cell deployment.
struct NetworkParams {
  double lambda = 0.0;  ///< BS density, BSs/km^2
  double rho = 300.0;   ///< active-UE density, UEs/km^2
  double q = 4.05;      ///< Gamma shape of the normalized cell-area distribution

  /// Throws TruError(kInvalidParameter) unless every field is finite and > 0.
  void Validate() const;
};

/// Per-UE traffic mix and TDD frame layout.
///
/// The UL request probability and the static UL subframe count are implied
/// by the stored fields and never stored separately.
struct TrafficFrameParams {
  double p_dl = 2.0 / 3.0;
  int frame_len = 10;
  int static_dl_subframes = 7;

  double p_ul() const { return 1.0 - p_dl; }
  int static_ul_subframes() const { return frame_len - static_dl_subframes; }

  void Validate() const;
};

/// Controls truncation of the infinite sums over the per-BS UE count.
struct TailPolicy {
  double epsilon = 1e-12;
  std::int64_t k_max = 1'000'000;

  void Validate() const;
};

enum class DuplexMode { kDynamic, kStatic };

const char* ToString(DuplexMode mode);
/// Accepts "dynamic" / "static" (case-sensitive). Throws on anything else.
DuplexMode ParseDuplexMode(const std::string& text);

}  // namespace tdd_tru

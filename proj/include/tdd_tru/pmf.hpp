#pragma once

#include <cstdint>
#include <vector>

namespace tdd_tru {

/// Finite discrete distribution over consecutive integers starting at
/// `support_min`. Mass lost by truncating an infinite support is kept in
/// `tail_mass` (an upper bound on the mass above the stored support).
struct Pmf {
  std::int64_t support_min = 0;
  std::vector<double> probs;
  double tail_mass = 0.0;

  std::int64_t support_max() const {
    return support_min + static_cast<std::int64_t>(probs.size()) - 1;
  }

  /// Mass at `x`; zero outside the stored support.
  double at(std::int64_t x) const;

  /// Sum of stored masses (excludes tail_mass).
  double stored_mass() const;

  /// P[X <= x] over the stored support.
  double cdf(std::int64_t x) const;

  double mean() const;

  /// Smallest outcome attaining the largest stored mass.
  std::int64_t mode() const;

  /// True when every prob is >= 0 and stored_mass + tail_mass is within
  /// `tolerance` of one.
  bool IsNormalized(double tolerance = 1e-9) const;

  /// Point mass at `value`.
  static Pmf PointMass(std::int64_t value);
};

}  // namespace tdd_tru

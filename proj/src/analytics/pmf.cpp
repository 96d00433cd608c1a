#include "tdd_tru/pmf.hpp"

#include <algorithm>
#include <cmath>

namespace tdd_tru {

double Pmf::at(std::int64_t x) const {
  if (x < support_min || x > support_max()) return 0.0;
  return probs[static_cast<std::size_t>(x - support_min)];
}

double Pmf::stored_mass() const {
  double total = 0.0;
  for (double p : probs) total += p;
  return total;
}

double Pmf::cdf(std::int64_t x) const {
  double total = 0.0;
  for (std::int64_t v = support_min; v <= std::min(x, support_max()); ++v) {
    total += probs[static_cast<std::size_t>(v - support_min)];
  }
  return total;
}

double Pmf::mean() const {
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    total += static_cast<double>(support_min + static_cast<std::int64_t>(i)) * probs[i];
  }
  return total;
}

std::int64_t Pmf::mode() const {
  const auto it = std::max_element(probs.begin(), probs.end());
  return support_min + (it - probs.begin());
}

bool Pmf::IsNormalized(double tolerance) const {
  if (tail_mass < 0.0) return false;
  for (double p : probs) {
    if (!(p >= 0.0)) return false;
  }
  return std::abs(stored_mass() + tail_mass - 1.0) <= tolerance;
}

Pmf Pmf::PointMass(std::int64_t value) {
  return Pmf{value, {1.0}, 0.0};
}

}  // namespace tdd_tru

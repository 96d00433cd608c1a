#include <array>
#include <cmath>

#include "tdd_tru/simulator.hpp"

namespace tdd_tru::sim {

namespace {

std::uint64_t SplitMix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng TrialStream(std::uint64_t master_seed, std::uint64_t trial) {
  std::uint64_t state = master_seed;
  const std::uint64_t key = SplitMix64(state);
  state = key ^ (trial * 0xD1B54A32D192ED03ULL);
  std::array<std::uint32_t, 8> words{};
  for (std::size_t i = 0; i < words.size(); i += 2) {
    const std::uint64_t w = SplitMix64(state);
    words[i] = static_cast<std::uint32_t>(w);
    words[i + 1] = static_cast<std::uint32_t>(w >> 32);
  }
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

double TorusDistanceSquared(Point a, Point b, double side) {
  double dx = std::abs(a.x - b.x);
  double dy = std::abs(a.y - b.y);
  dx = std::min(dx, side - dx);
  dy = std::min(dy, side - dy);
  return dx * dx + dy * dy;
}

std::vector<Point> SamplePpp(double density, double region_side, Rng& rng) {
  const double mean = density * region_side * region_side;
  if (mean <= 0.0) return {};
  std::poisson_distribution<std::int64_t> count_dist(mean);
  std::uniform_real_distribution<double> coord(0.0, region_side);
  const std::int64_t n = count_dist(rng);

  auto draw = [&] {
    // generate_canonical may round up to the upper bound; wrap it.
    const double v = coord(rng);
    return v >= region_side ? 0.0 : v;
  };
  std::vector<Point> points(static_cast<std::size_t>(n));
  for (auto& p : points) {
    p.x = draw();
    p.y = draw();
  }
  return points;
}

}  // namespace tdd_tru::sim

#include <algorithm>
#include <cmath>
#include <limits>

#include "tdd_tru/error.hpp"
#include "tdd_tru/simulator.hpp"

namespace tdd_tru::sim {

namespace {

// Uniform bucket grid over the torus. Points within a bucket keep ascending
// index order.
class TorusGrid {
 public:
  TorusGrid(std::span<const Point> points, double side) : points_(points), side_(side) {
    constexpr double kPointsPerCell = 2.0;
    const double n = static_cast<double>(points.size());
    const double cells_per_dim = std::floor(std::sqrt(n / kPointsPerCell));
    cells_ = static_cast<int>(std::clamp(cells_per_dim, 1.0, 4096.0));
    cell_size_ = side_ / cells_;

    std::vector<std::int32_t> bucket(points.size());
    start_.assign(static_cast<std::size_t>(cells_) * cells_ + 1, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      bucket[i] = CellOf(points[i]);
      ++start_[static_cast<std::size_t>(bucket[i]) + 1];
    }
    for (std::size_t c = 1; c < start_.size(); ++c) start_[c] += start_[c - 1];
    members_.resize(points.size());
    std::vector<std::int32_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t i = 0; i < points.size(); ++i) {
      members_[static_cast<std::size_t>(fill[static_cast<std::size_t>(bucket[i])]++)] =
          static_cast<std::int32_t>(i);
    }
  }

  std::int32_t Nearest(Point p) const {
    std::int32_t best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    auto consider_cell = [&](int cx, int cy) {
      const auto c = static_cast<std::size_t>(cy * cells_ + cx);
      for (auto j = start_[c]; j < start_[c + 1]; ++j) {
        const std::int32_t idx = members_[static_cast<std::size_t>(j)];
        const double d2 = TorusDistanceSquared(p, points_[static_cast<std::size_t>(idx)], side_);
        if (d2 < best_d2 || (d2 == best_d2 && idx < best)) {
          best_d2 = d2;
          best = idx;
        }
      }
    };

    const int px = Coord(p.x);
    const int py = Coord(p.y);
    const int max_ring = cells_ / 2;
    for (int r = 0; r <= max_ring; ++r) {
      // When 2r+1 exceeds the grid width, offsets -r and +r alias the same
      // column; drop -r to visit each cell once.
      const int lo = (2 * r + 1 > cells_) ? -r + 1 : -r;
      for (int dy = lo; dy <= r; ++dy) {
        for (int dx = lo; dx <= r; ++dx) {
          if (std::abs(dx) != r && std::abs(dy) != r) continue;
          consider_cell(Wrap(px + dx), Wrap(py + dy));
        }
      }
      // Unvisited buckets are at least r cell widths away.
      const double reach = r * cell_size_;
      if (best >= 0 && best_d2 < reach * reach) break;
    }
    return best;
  }

 private:
  int Coord(double v) const { return std::min(cells_ - 1, static_cast<int>(v / cell_size_)); }
  int Wrap(int c) const { return ((c % cells_) + cells_) % cells_; }
  std::int32_t CellOf(Point p) const { return Coord(p.y) * cells_ + Coord(p.x); }

  std::span<const Point> points_;
  double side_;
  int cells_ = 1;
  double cell_size_ = 1.0;
  std::vector<std::int32_t> start_;
  std::vector<std::int32_t> members_;
};

}  // namespace

std::vector<std::int32_t> NearestBs(const Deployment& deployment) {
  if (deployment.bs_points.empty()) {
    throw TruError(ErrorCode::kNoBaseStation, "deployment has no base station");
  }
  const TorusGrid grid(deployment.bs_points, deployment.region_side);
  std::vector<std::int32_t> out(deployment.ue_points.size());
  for (std::size_t u = 0; u < out.size(); ++u) {
    out[u] = grid.Nearest(deployment.ue_points[u]);
  }
  return out;
}

std::vector<std::int64_t> AssociateNearest(const Deployment& deployment) {
  std::vector<std::int64_t> counts(deployment.bs_points.size(), 0);
  for (std::int32_t bs : NearestBs(deployment)) ++counts[static_cast<std::size_t>(bs)];
  return counts;
}

}  // namespace tdd_tru::sim

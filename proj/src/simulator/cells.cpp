#include <algorithm>

#include <fmt/core.h>

#include "tdd_tru/analytics.hpp"
#include "tdd_tru/error.hpp"
#include "tdd_tru/simulator.hpp"

namespace tdd_tru::sim {

std::int64_t SampleRequests(std::int64_t ue_count, double p_dl, Rng& rng) {
  if (ue_count < 0) ThrowInvalid("UE count must be >= 0");
  std::bernoulli_distribution wants_dl(p_dl);
  std::int64_t dl = 0;
  for (std::int64_t u = 0; u < ue_count; ++u) dl += wants_dl(rng) ? 1 : 0;
  return dl;
}

CellLoad MakeCellLoad(std::int64_t bs_index, std::int64_t ue_count, std::int64_t dl_requests,
                      const TrafficFrameParams& traffic, DuplexMode mode) {
  if (dl_requests < 0 || dl_requests > ue_count) {
    ThrowInvalid(fmt::format("DL requests {} outside [0, {}]", dl_requests, ue_count));
  }
  CellLoad cell{bs_index, ue_count, dl_requests, 0};
  if (ue_count == 0) return cell;
  cell.dl_subframes = mode == DuplexMode::kDynamic
                          ? analytics::SubframeSplit(dl_requests, ue_count, traffic.frame_len)
                          : traffic.static_dl_subframes;
  return cell;
}

std::vector<LinkDirection> AllocateFrame(const CellLoad& cell, const TrafficFrameParams& traffic,
                                         DuplexMode mode) {
  if (cell.ue_count < 1) ThrowInvalid("frame allocation needs an active cell");
  const int dl = mode == DuplexMode::kDynamic
                     ? analytics::SubframeSplit(cell.dl_requests, cell.ue_count, traffic.frame_len)
                     : traffic.static_dl_subframes;
  std::vector<LinkDirection> frame(static_cast<std::size_t>(traffic.frame_len),
                                   LinkDirection::kUplink);
  std::fill_n(frame.begin(), dl, LinkDirection::kDownlink);
  return frame;
}

std::string FramePattern(std::span<const LinkDirection> frame) {
  std::string out;
  out.reserve(frame.size());
  for (LinkDirection d : frame) out.push_back(static_cast<char>(d));
  return out;
}

int CellUtilization::dl_count() const {
  return static_cast<int>(std::count(dl_used.begin(), dl_used.end(), 1));
}

int CellUtilization::ul_count() const {
  return static_cast<int>(std::count(ul_used.begin(), ul_used.end(), 1));
}

CellUtilization MeasureTru(const CellLoad& cell, const TrafficFrameParams& traffic,
                           DuplexMode mode) {
  const std::vector<LinkDirection> frame = AllocateFrame(cell, traffic, mode);
  CellUtilization use{std::vector<std::uint8_t>(frame.size(), 0),
                      std::vector<std::uint8_t>(frame.size(), 0)};
  // A direction's subframes carry data iff some UE requested it. The rounded
  // split only grants DL subframes when m^D >= 1 and UL subframes when
  // m^U >= 1, so dynamic frames are never wasted.
  const bool dl_busy = cell.dl_requests >= 1;
  const bool ul_busy = cell.ul_requests() >= 1;
  for (std::size_t l = 0; l < frame.size(); ++l) {
    if (frame[l] == LinkDirection::kDownlink) {
      use.dl_used[l] = dl_busy ? 1 : 0;
    } else {
      use.ul_used[l] = ul_busy ? 1 : 0;
    }
  }
  return use;
}

std::vector<CellUtilization> MeasureTru(std::span<const CellLoad> cells,
                                        const TrafficFrameParams& traffic, DuplexMode mode) {
  std::vector<CellUtilization> out;
  out.reserve(cells.size());
  for (const CellLoad& cell : cells) out.push_back(MeasureTru(cell, traffic, mode));
  return out;
}

}  // namespace tdd_tru::sim

#pragma once

// Monte Carlo stochastic-geometry simulator: PPP deployments on a square
// torus, nearest-BS association, per-UE traffic draws and per-cell TDD frame
// allocation.

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tdd_tru/params.hpp"
#include "tdd_tru/pmf.hpp"

namespace tdd_tru::sim {

using Rng = std::mt19937_64;

/// Independent stream for one trial. The 64-bit master seed and the trial
/// index are mixed with SplitMix64 into a four-word seed sequence, so the
/// stream of trial i depends only on (master_seed, i).
Rng TrialStream(std::uint64_t master_seed, std::uint64_t trial);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Deployment {
  double region_side = 1.0;
  std::vector<Point> bs_points;
  std::vector<Point> ue_points;
};

/// Squared wrap-around distance on a torus of the given side.
double TorusDistanceSquared(Point a, Point b, double side);

/// Homogeneous PPP on [0, side)^2: Poisson(density * side^2) uniform points.
std::vector<Point> SamplePpp(double density, double region_side, Rng& rng);

/// Index of the nearest BS (torus distance) for every UE; ties go to the
/// lowest BS index. Throws TruError(kNoBaseStation) without BSs.
std::vector<std::int32_t> NearestBs(const Deployment& deployment);

/// UE count of every BS under nearest-BS association.
std::vector<std::int64_t> AssociateNearest(const Deployment& deployment);

/// Number of DL requests among ue_count UEs, one Bernoulli(p_dl) draw per UE.
std::int64_t SampleRequests(std::int64_t ue_count, double p_dl, Rng& rng);

struct CellLoad {
  std::int64_t bs_index = 0;
  std::int64_t ue_count = 0;
  std::int64_t dl_requests = 0;
  int dl_subframes = 0;

  std::int64_t ul_requests() const { return ue_count - dl_requests; }
};

/// Fills dl_subframes from the TDD mode: the rounded request ratio for
/// dynamic TDD, the fixed split for static TDD, zero for an idle BS.
CellLoad MakeCellLoad(std::int64_t bs_index, std::int64_t ue_count, std::int64_t dl_requests,
                      const TrafficFrameParams& traffic, DuplexMode mode);

enum class LinkDirection : char { kDownlink = 'D', kUplink = 'U' };

/// DL-before-UL frame: dl_subframes 'D' followed by 'U' up to frame_len.
std::vector<LinkDirection> AllocateFrame(const CellLoad& cell, const TrafficFrameParams& traffic,
                                         DuplexMode mode);
std::string FramePattern(std::span<const LinkDirection> frame);

/// Which subframes of one active cell's frame carry traffic.
struct CellUtilization {
  std::vector<std::uint8_t> dl_used;
  std::vector<std::uint8_t> ul_used;

  int dl_count() const;
  int ul_count() const;
};

/// Dynamic: every subframe is used in its allocated direction.
/// Static: the whole DL block is used iff the cell has a DL request, the
/// whole UL block iff it has a UL request.
CellUtilization MeasureTru(const CellLoad& cell, const TrafficFrameParams& traffic,
                           DuplexMode mode);
std::vector<CellUtilization> MeasureTru(std::span<const CellLoad> cells,
                                        const TrafficFrameParams& traffic, DuplexMode mode);

// --- Campaigns -------------------------------------------------------------

struct SimConfig {
  NetworkParams net;
  TrafficFrameParams traffic;
  double region_side = 1.0;  ///< km
  std::int64_t trials = 1;
  std::uint64_t seed = 1;
  DuplexMode mode = DuplexMode::kDynamic;
  int workers = 0;                  ///< 0 = hardware concurrency
  bool keep_records = false;        ///< retain every CellLoad for CSV export
  int max_conditional_load = 64;    ///< largest k with conditional histograms
  int max_resamples = 1000;         ///< per trial, for empty realizations

  void Validate() const;
  /// Non-fatal configuration concerns (e.g. fewer than one expected BS).
  std::vector<std::string> Warnings() const;
};

/// Square side giving about `target_active_cells` active cells per trial.
double DefaultRegionSide(const NetworkParams& net, double target_active_cells = 1e4);

/// 95% normal-approximation half-widths.
struct TruCi95 {
  std::vector<double> q_dl;
  std::vector<double> q_ul;
  double kappa_dl = 0.0;
  double kappa_ul = 0.0;
  double kappa = 0.0;
};

struct TruEstimate {
  std::vector<double> q_dl_hat;
  std::vector<double> q_ul_hat;
  double kappa_dl_hat = 0.0;
  double kappa_ul_hat = 0.0;
  double kappa_hat = 0.0;
  TruCi95 ci95_halfwidth;
  std::int64_t n_active_cells = 0;
};

/// Integer tallies gathered by a campaign. All fields merge by addition, so
/// the totals do not depend on how trials were split among workers.
class CampaignTally {
 public:
  CampaignTally() = default;
  CampaignTally(int frame_len, int max_conditional_load);

  void AddIdleBs();
  void AddActiveCell(const CellLoad& cell, const CellUtilization& use);
  void Merge(const CampaignTally& other);

  int frame_len() const { return frame_len_; }
  int max_conditional_load() const { return max_conditional_load_; }
  std::int64_t active_cells() const { return active_cells_; }
  std::int64_t total_bs() const;

  /// Empirical PMFs. Conditional ones require 1 <= k <= max_conditional_load
  /// and at least one sample with that load.
  Pmf UePerBs() const;
  Pmf UePerActiveBs() const;
  Pmf DlRequestsGivenLoad(std::int64_t k) const;
  Pmf DlSubframesGivenLoad(std::int64_t k) const;
  std::int64_t SamplesWithLoad(std::int64_t k) const;

  /// Throws TruError(kInsufficientSamples) without active cells.
  TruEstimate Estimate() const;

 private:
  int frame_len_ = 0;
  int max_conditional_load_ = 0;
  std::int64_t active_cells_ = 0;
  std::vector<std::int64_t> load_counts_;  // index = UE count, includes 0
  std::vector<std::int64_t> dl_used_;      // per subframe
  std::vector<std::int64_t> ul_used_;
  // Per-cell sums of used-subframe counts and their squares.
  std::int64_t sum_dl_ = 0, sum_dl_sq_ = 0;
  std::int64_t sum_ul_ = 0, sum_ul_sq_ = 0;
  std::int64_t sum_total_sq_ = 0;
  std::vector<std::vector<std::int64_t>> dl_requests_given_load_;
  std::vector<std::vector<std::int64_t>> dl_subframes_given_load_;
};

struct TrialRecord {
  std::int64_t trial = 0;
  CellLoad cell;
};

struct CampaignResult {
  TruEstimate estimate;
  CampaignTally tally;
  std::int64_t trials = 0;
  std::int64_t total_ue = 0;
  std::int64_t skipped_realizations = 0;
  std::vector<TrialRecord> records;  ///< only with keep_records, trial order
};

/// One deployment realization; exposed for tests and custom drivers.
/// Empty realizations are redrawn from the same stream and counted in
/// `skipped`.
CampaignTally RunTrial(const SimConfig& config, std::uint64_t trial, std::int64_t& total_ue,
                       std::int64_t& skipped, std::vector<TrialRecord>* records);

/// Runs all trials on `workers` threads and aggregates. Output is identical
/// for a given (config, seed) regardless of the worker count.
CampaignResult RunCampaign(const SimConfig& config);

/// CSV columns: trial,bs_index,ue_count,dl_requests,dl_subframes.
void WriteCellRecordsCsv(std::ostream& out, std::span<const TrialRecord> records);

}  // namespace tdd_tru::sim

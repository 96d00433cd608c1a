#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include <fmt/core.h>

#include "tdd_tru/analytics.hpp"
#include "tdd_tru/error.hpp"
#include "tdd_tru/simulator.hpp"

namespace tdd_tru::sim {

void SimConfig::Validate() const {
  net.Validate();
  traffic.Validate();
  if (!std::isfinite(region_side) || region_side <= 0.0) {
    ThrowInvalid(fmt::format("region_side must be > 0 (got {})", region_side));
  }
  if (trials < 1) ThrowInvalid(fmt::format("trials must be >= 1 (got {})", trials));
  if (workers < 0) ThrowInvalid("workers must be >= 0");
  if (max_conditional_load < 1) ThrowInvalid("max_conditional_load must be >= 1");
  if (max_resamples < 1) ThrowInvalid("max_resamples must be >= 1");
}

std::vector<std::string> SimConfig::Warnings() const {
  std::vector<std::string> out;
  const double expected_bs = net.lambda * region_side * region_side;
  if (expected_bs < 1.0) {
    out.push_back(fmt::format(
        "expected BS count per trial is {:.3g} < 1; most realizations will be redrawn",
        expected_bs));
  }
  return out;
}

double DefaultRegionSide(const NetworkParams& net, double target_active_cells) {
  return std::sqrt(target_active_cells / analytics::ActiveBsDensity(net));
}

// --- CampaignTally ---------------------------------------------------------

CampaignTally::CampaignTally(int frame_len, int max_conditional_load)
    : frame_len_(frame_len),
      max_conditional_load_(max_conditional_load),
      dl_used_(static_cast<std::size_t>(frame_len), 0),
      ul_used_(static_cast<std::size_t>(frame_len), 0),
      dl_requests_given_load_(static_cast<std::size_t>(max_conditional_load) + 1),
      dl_subframes_given_load_(static_cast<std::size_t>(max_conditional_load) + 1) {
  for (int k = 1; k <= max_conditional_load; ++k) {
    dl_requests_given_load_[static_cast<std::size_t>(k)].assign(static_cast<std::size_t>(k) + 1, 0);
    dl_subframes_given_load_[static_cast<std::size_t>(k)].assign(
        static_cast<std::size_t>(frame_len) + 1, 0);
  }
}

namespace {

void Bump(std::vector<std::int64_t>& counts, std::int64_t index, std::int64_t by = 1) {
  if (static_cast<std::size_t>(index) >= counts.size()) {
    counts.resize(static_cast<std::size_t>(index) + 1, 0);
  }
  counts[static_cast<std::size_t>(index)] += by;
}

Pmf FromCounts(std::int64_t support_min, std::span<const std::int64_t> counts) {
  std::int64_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) {
    throw TruError(ErrorCode::kInsufficientSamples, "no samples for empirical PMF");
  }
  Pmf out{support_min, std::vector<double>(counts.size()), 0.0};
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out.probs[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
  }
  return out;
}

// 1.96 * standard error of the mean, from integer sums of x and x^2 where
// each per-cell value is x / scale.
double MeanHalfWidth(std::int64_t n, std::int64_t sum, std::int64_t sum_sq, double scale) {
  if (n < 2) return 0.0;
  const long double nn = n;
  const long double mean = sum / nn;
  const long double var = (sum_sq - nn * mean * mean) / (nn - 1);
  return static_cast<double>(1.96L * std::sqrt(std::max(var, 0.0L) / nn) / scale);
}

}  // namespace

void CampaignTally::AddIdleBs() { Bump(load_counts_, 0); }

void CampaignTally::AddActiveCell(const CellLoad& cell, const CellUtilization& use) {
  Bump(load_counts_, cell.ue_count);
  ++active_cells_;
  for (int l = 0; l < frame_len_; ++l) {
    dl_used_[static_cast<std::size_t>(l)] += use.dl_used[static_cast<std::size_t>(l)];
    ul_used_[static_cast<std::size_t>(l)] += use.ul_used[static_cast<std::size_t>(l)];
  }
  const std::int64_t dl = use.dl_count();
  const std::int64_t ul = use.ul_count();
  sum_dl_ += dl;
  sum_dl_sq_ += dl * dl;
  sum_ul_ += ul;
  sum_ul_sq_ += ul * ul;
  sum_total_sq_ += (dl + ul) * (dl + ul);
  if (cell.ue_count <= max_conditional_load_) {
    const auto k = static_cast<std::size_t>(cell.ue_count);
    ++dl_requests_given_load_[k][static_cast<std::size_t>(cell.dl_requests)];
    ++dl_subframes_given_load_[k][static_cast<std::size_t>(cell.dl_subframes)];
  }
}

void CampaignTally::Merge(const CampaignTally& other) {
  if (other.frame_len_ == 0) return;
  if (frame_len_ == 0) {
    *this = other;
    return;
  }
  if (other.frame_len_ != frame_len_ || other.max_conditional_load_ != max_conditional_load_) {
    ThrowInvalid("cannot merge tallies with different shapes");
  }
  for (std::size_t k = 0; k < other.load_counts_.size(); ++k) {
    Bump(load_counts_, static_cast<std::int64_t>(k), other.load_counts_[k]);
  }
  active_cells_ += other.active_cells_;
  for (std::size_t l = 0; l < dl_used_.size(); ++l) {
    dl_used_[l] += other.dl_used_[l];
    ul_used_[l] += other.ul_used_[l];
  }
  sum_dl_ += other.sum_dl_;
  sum_dl_sq_ += other.sum_dl_sq_;
  sum_ul_ += other.sum_ul_;
  sum_ul_sq_ += other.sum_ul_sq_;
  sum_total_sq_ += other.sum_total_sq_;
  for (std::size_t k = 1; k < dl_requests_given_load_.size(); ++k) {
    for (std::size_t i = 0; i < dl_requests_given_load_[k].size(); ++i) {
      dl_requests_given_load_[k][i] += other.dl_requests_given_load_[k][i];
    }
    for (std::size_t i = 0; i < dl_subframes_given_load_[k].size(); ++i) {
      dl_subframes_given_load_[k][i] += other.dl_subframes_given_load_[k][i];
    }
  }
}

std::int64_t CampaignTally::total_bs() const {
  std::int64_t total = 0;
  for (auto c : load_counts_) total += c;
  return total;
}

Pmf CampaignTally::UePerBs() const { return FromCounts(0, load_counts_); }

Pmf CampaignTally::UePerActiveBs() const {
  if (load_counts_.size() < 2) {
    throw TruError(ErrorCode::kInsufficientSamples, "no active cells observed");
  }
  return FromCounts(1, std::span(load_counts_).subspan(1));
}

namespace {

void CheckConditionalLoad(std::int64_t k, int max_load) {
  if (k < 1 || k > max_load) {
    ThrowInvalid(fmt::format("conditional load {} outside [1, {}]", k, max_load));
  }
}

}  // namespace

Pmf CampaignTally::DlRequestsGivenLoad(std::int64_t k) const {
  CheckConditionalLoad(k, max_conditional_load_);
  return FromCounts(0, dl_requests_given_load_[static_cast<std::size_t>(k)]);
}

Pmf CampaignTally::DlSubframesGivenLoad(std::int64_t k) const {
  CheckConditionalLoad(k, max_conditional_load_);
  return FromCounts(0, dl_subframes_given_load_[static_cast<std::size_t>(k)]);
}

std::int64_t CampaignTally::SamplesWithLoad(std::int64_t k) const {
  if (k < 0 || static_cast<std::size_t>(k) >= load_counts_.size()) return 0;
  return load_counts_[static_cast<std::size_t>(k)];
}

TruEstimate CampaignTally::Estimate() const {
  if (active_cells_ == 0) {
    throw TruError(ErrorCode::kInsufficientSamples, "no active cells observed");
  }
  const double n = static_cast<double>(active_cells_);
  const double frame = frame_len_;
  TruEstimate out;
  out.n_active_cells = active_cells_;
  for (int l = 0; l < frame_len_; ++l) {
    const double dl = static_cast<double>(dl_used_[static_cast<std::size_t>(l)]) / n;
    const double ul = static_cast<double>(ul_used_[static_cast<std::size_t>(l)]) / n;
    out.q_dl_hat.push_back(dl);
    out.q_ul_hat.push_back(ul);
    out.ci95_halfwidth.q_dl.push_back(1.96 * std::sqrt(dl * (1.0 - dl) / n));
    out.ci95_halfwidth.q_ul.push_back(1.96 * std::sqrt(ul * (1.0 - ul) / n));
  }
  out.kappa_dl_hat = static_cast<double>(sum_dl_) / (n * frame);
  out.kappa_ul_hat = static_cast<double>(sum_ul_) / (n * frame);
  out.kappa_hat = static_cast<double>(sum_dl_ + sum_ul_) / (n * frame);
  out.ci95_halfwidth.kappa_dl = MeanHalfWidth(active_cells_, sum_dl_, sum_dl_sq_, frame);
  out.ci95_halfwidth.kappa_ul = MeanHalfWidth(active_cells_, sum_ul_, sum_ul_sq_, frame);
  out.ci95_halfwidth.kappa =
      MeanHalfWidth(active_cells_, sum_dl_ + sum_ul_, sum_total_sq_, frame);
  return out;
}

// --- Trials ----------------------------------------------------------------

CampaignTally RunTrial(const SimConfig& config, std::uint64_t trial, std::int64_t& total_ue,
                       std::int64_t& skipped, std::vector<TrialRecord>* records) {
  Rng rng = TrialStream(config.seed, trial);
  Deployment deployment{config.region_side, {}, {}};
  for (int attempt = 0;; ++attempt) {
    deployment.bs_points = SamplePpp(config.net.lambda, config.region_side, rng);
    deployment.ue_points = SamplePpp(config.net.rho, config.region_side, rng);
    if (!deployment.bs_points.empty() && !deployment.ue_points.empty()) break;
    ++skipped;
    if (attempt + 1 >= config.max_resamples) {
      throw TruError(deployment.bs_points.empty() ? ErrorCode::kNoBaseStation
                                                  : ErrorCode::kInsufficientSamples,
                     fmt::format("trial {}: {} consecutive empty realizations", trial,
                                 config.max_resamples));
    }
  }
  total_ue += static_cast<std::int64_t>(deployment.ue_points.size());

  const std::vector<std::int64_t> loads = AssociateNearest(deployment);
  CampaignTally tally(config.traffic.frame_len, config.max_conditional_load);
  for (std::size_t b = 0; b < loads.size(); ++b) {
    const auto bs = static_cast<std::int64_t>(b);
    if (loads[b] == 0) {
      tally.AddIdleBs();
      if (records) records->push_back({static_cast<std::int64_t>(trial), CellLoad{bs, 0, 0, 0}});
      continue;
    }
    const std::int64_t dl = SampleRequests(loads[b], config.traffic.p_dl, rng);
    const CellLoad cell = MakeCellLoad(bs, loads[b], dl, config.traffic, config.mode);
    tally.AddActiveCell(cell, MeasureTru(cell, config.traffic, config.mode));
    if (records) records->push_back({static_cast<std::int64_t>(trial), cell});
  }
  return tally;
}

CampaignResult RunCampaign(const SimConfig& config) {
  config.Validate();
  int workers = config.workers > 0 ? config.workers
                                   : static_cast<int>(std::thread::hardware_concurrency());
  workers = static_cast<int>(std::clamp<std::int64_t>(workers, 1, config.trials));

  struct WorkerState {
    CampaignTally tally;
    std::int64_t total_ue = 0;
    std::int64_t skipped = 0;
  };
  std::vector<WorkerState> states(static_cast<std::size_t>(workers));
  std::vector<std::vector<TrialRecord>> per_trial_records;
  if (config.keep_records) per_trial_records.resize(static_cast<std::size_t>(config.trials));

  std::atomic<std::int64_t> next_trial{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&](WorkerState& state) {
    try {
      for (std::int64_t t = next_trial++; t < config.trials; t = next_trial++) {
        auto* records =
            config.keep_records ? &per_trial_records[static_cast<std::size_t>(t)] : nullptr;
        state.tally.Merge(RunTrial(config, static_cast<std::uint64_t>(t), state.total_ue,
                                   state.skipped, records));
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next_trial = config.trials;
    }
  };

  if (workers == 1) {
    work(states[0]);
  } else {
    std::vector<std::jthread> threads;
    for (auto& state : states) threads.emplace_back(work, std::ref(state));
  }
  if (failure) std::rethrow_exception(failure);

  CampaignResult result;
  result.trials = config.trials;
  for (const auto& state : states) {
    result.tally.Merge(state.tally);
    result.total_ue += state.total_ue;
    result.skipped_realizations += state.skipped;
  }
  result.estimate = result.tally.Estimate();
  for (auto& records : per_trial_records) {
    result.records.insert(result.records.end(), records.begin(), records.end());
  }
  return result;
}

void WriteCellRecordsCsv(std::ostream& out, std::span<const TrialRecord> records) {
  out << "trial,bs_index,ue_count,dl_requests,dl_subframes\n";
  for (const auto& r : records) {
    out << r.trial << ',' << r.cell.bs_index << ',' << r.cell.ue_count << ','
        << r.cell.dl_requests << ',' << r.cell.dl_subframes << '\n';
  }
}

}  // namespace tdd_tru::sim

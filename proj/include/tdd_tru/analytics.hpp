#pragma once

// Closed-form MAC-layer time-resource utilization (TRU) of synchronous
// dynamic and static TDD in a Poisson small-cell network.
//
// All functions are pure; they may be called concurrently.

#include <cstdint>
#include <vector>

#include "tdd_tru/params.hpp"
#include "tdd_tru/pmf.hpp"

namespace tdd_tru::analytics {

/// Per-subframe utilization probabilities, index 0 is subframe 1.
struct TruProfile {
  std::vector<double> q_dl;
  std::vector<double> q_ul;
  /// Absolute error bound from truncating the sum over the UE count.
  double error_bound = 0.0;

  int frame_len() const { return static_cast<int>(q_dl.size()); }
};

struct TruSummary {
  double kappa_dl = 0.0;
  double kappa_ul = 0.0;
  double kappa = 0.0;
  DuplexMode mode = DuplexMode::kDynamic;
  double error_bound = 0.0;
};

/// Total-TRU gain of dynamic over static TDD and its DL / UL shares.
struct TruGain {
  double dl = 0.0;
  double ul = 0.0;
  double total = 0.0;
  double error_bound = 0.0;
};

// --- UE-count distributions --------------------------------------------

/// Density of BSs serving at least one UE, BSs/km^2.
double ActiveBsDensity(const NetworkParams& net);

/// Probability that a BS serves at least one UE under the Gamma-area model;
/// equals ActiveBsDensity(net) / lambda.
double ActiveProbability(const NetworkParams& net);

/// Negative Binomial PMF of the UE count K of a typical BS, support 0..K.
Pmf UePerBsPmf(const NetworkParams& net, const TailPolicy& policy = {});

/// Zero-truncated Negative Binomial PMF of the UE count of an active BS,
/// support 1..K.
Pmf UePerActiveBsPmf(const NetworkParams& net, const TailPolicy& policy = {});

// --- Request and subframe distributions for a fixed active-cell load -----

/// Binomial(k, p_dl) PMF of the number of DL requests among k UEs.
Pmf DlRequestPmf(std::int64_t ue_count, double p_dl);
/// Mirror of DlRequestPmf: mass of m UL requests.
Pmf UlRequestPmf(std::int64_t ue_count, double p_dl);

/// Dynamic-TDD DL subframe count for m_dl DL requests out of ue_count:
/// the nearest integer to m_dl / ue_count * frame_len, exact halves
/// rounded away from zero.
int SubframeSplit(std::int64_t m_dl, std::int64_t ue_count, int frame_len);

/// PMF of the DL subframe count over 0..frame_len for a cell of ue_count UEs.
Pmf DlSubframePmf(std::int64_t ue_count, double p_dl, int frame_len);
/// Mirror of DlSubframePmf over the UL subframe count.
Pmf UlSubframePmf(std::int64_t ue_count, double p_dl, int frame_len);

/// P[N^D <= n] for a cell of ue_count UEs.
double DlSubframeCmf(std::int64_t ue_count, double p_dl, int frame_len, int n);

/// Conditional DL utilization of every subframe for a cell of ue_count UEs:
/// element l-1 is P[N^D >= l].
std::vector<double> ConditionalDlTru(std::int64_t ue_count, double p_dl,
                                     int frame_len);

// --- TRU results ---------------------------------------------------------
//
// Overloads taking `active_load` accept any distribution of the active-cell
// UE count (support_min >= 1); the others build it from `net`.

TruProfile SubframeTruDynamic(const Pmf& active_load,
                              const TrafficFrameParams& traffic);
TruProfile SubframeTruDynamic(const NetworkParams& net,
                              const TrafficFrameParams& traffic,
                              const TailPolicy& policy = {});

TruSummary AverageTruDynamic(const Pmf& active_load,
                             const TrafficFrameParams& traffic);
TruSummary AverageTruDynamic(const NetworkParams& net,
                             const TrafficFrameParams& traffic,
                             const TailPolicy& policy = {});

/// Static TDD with the fixed split (static_dl_subframes, static_ul_subframes).
/// A direction's subframes are wasted in a frame when no UE of the cell
/// requests that direction.
TruSummary AverageTruStatic(const Pmf& active_load,
                            const TrafficFrameParams& traffic);
TruSummary AverageTruStatic(const NetworkParams& net,
                            const TrafficFrameParams& traffic,
                            const TailPolicy& policy = {});

/// Waste probabilities of static TDD: P[no DL request], P[no UL request].
struct WasteProbabilities {
  double dl = 0.0;
  double ul = 0.0;
};
WasteProbabilities StaticWaste(const Pmf& active_load, double p_dl);

/// kappa(dynamic) - kappa(static). `total` is evaluated directly from the
/// single-sum expression; `dl` and `ul` are the per-direction differences.
TruGain AdditionalTru(const Pmf& active_load, const TrafficFrameParams& traffic);
TruGain AdditionalTru(const NetworkParams& net,
                      const TrafficFrameParams& traffic,
                      const TailPolicy& policy = {});

/// Limit of AdditionalTru as lambda -> infinity (one UE per active BS).
TruGain AdditionalTruLimit(const TrafficFrameParams& traffic);

}  // namespace tdd_tru::analytics

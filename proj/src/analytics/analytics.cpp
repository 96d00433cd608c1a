#include "tdd_tru/analytics.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "tdd_tru/error.hpp"

namespace tdd_tru::analytics {

namespace {

// n * log(y) with the convention 0 * log(0) = 0, so that 0^0 = 1.
double XLogY(std::int64_t n, double log_y) {
  return n == 0 ? 0.0 : static_cast<double>(n) * log_y;
}

void CheckLoad(std::int64_t ue_count) {
  if (ue_count < 1) {
    ThrowInvalid(fmt::format("active-cell UE count must be >= 1 (got {})", ue_count));
  }
}

void CheckProbability(double p) {
  if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
    ThrowInvalid(fmt::format("probability must lie in [0, 1] (got {})", p));
  }
}

void CheckActiveLoad(const Pmf& load) {
  if (load.support_min < 1 || load.probs.empty()) {
    ThrowInvalid("active-cell load distribution must have support in k >= 1");
  }
}

// Success probability of the NB law of the per-BS UE count.
double NbRatio(const NetworkParams& net) {
  return net.rho / (net.rho + net.q * net.lambda);
}

// log f_K(k) straight from the log-gamma form.
double NbLogMass(std::int64_t k, const NetworkParams& net) {
  const double kd = static_cast<double>(k);
  const double log_ratio = std::log(NbRatio(net));
  const double log_empty = -std::log1p(net.rho / (net.q * net.lambda));
  return std::lgamma(kd + net.q) - std::lgamma(kd + 1.0) - std::lgamma(net.q) +
         XLogY(k, log_ratio) + net.q * log_empty;
}

}  // namespace

double ActiveProbability(const NetworkParams& net) {
  net.Validate();
  // 1 - (1 + rho / (q lambda))^(-q), without cancellation for small ratios.
  return -std::expm1(-net.q * std::log1p(net.rho / (net.q * net.lambda)));
}

double ActiveBsDensity(const NetworkParams& net) {
  const double density = net.lambda * ActiveProbability(net);
  return std::min(density, std::min(net.lambda, net.rho));
}

Pmf UePerBsPmf(const NetworkParams& net, const TailPolicy& policy) {
  net.Validate();
  policy.Validate();

  const double p = NbRatio(net);
  // Anchor the recurrence at the mode so the starting mass never underflows.
  std::int64_t anchor = 0;
  if (net.q > 1.0) {
    anchor = static_cast<std::int64_t>(std::floor((net.q - 1.0) * net.rho / (net.q * net.lambda)));
  }
  if (anchor > policy.k_max) {
    throw TruError(ErrorCode::kTailNotConverged,
                   fmt::format("UE-count mode {} exceeds k_max {}", anchor, policy.k_max));
  }

  std::vector<double> probs(static_cast<std::size_t>(anchor) + 1);
  probs[static_cast<std::size_t>(anchor)] = std::exp(NbLogMass(anchor, net));
  for (std::int64_t k = anchor; k > 0; --k) {
    const double kd = static_cast<double>(k);
    probs[static_cast<std::size_t>(k - 1)] =
        probs[static_cast<std::size_t>(k)] * kd / ((kd - 1.0 + net.q) * p);
  }

  // Extend upward until a geometric bound on the remaining mass is <= epsilon.
  // The ratio f(k+1)/f(k) = (k+q)/(k+1) p is non-increasing in k for q >= 1
  // and bounded by p for q < 1.
  double tail = 1.0;
  while (true) {
    const std::int64_t last = static_cast<std::int64_t>(probs.size()) - 1;
    const double last_mass = probs.back();
    const double ratio = (static_cast<double>(last) + net.q) / (static_cast<double>(last) + 1.0) * p;
    const double sup_ratio = net.q >= 1.0 ? ratio : p;
    if (sup_ratio < 1.0) {
      tail = last_mass * sup_ratio / (1.0 - sup_ratio);
      if (tail <= policy.epsilon) break;
    }
    if (last >= policy.k_max) {
      throw TruError(ErrorCode::kTailNotConverged,
                     fmt::format("UE-count tail mass {:.3g} > epsilon {:.3g} at k_max {}",
                                 tail, policy.epsilon, policy.k_max));
    }
    probs.push_back(last_mass * ratio);
  }
  return Pmf{0, std::move(probs), tail};
}

Pmf UePerActiveBsPmf(const NetworkParams& net, const TailPolicy& policy) {
  const Pmf all = UePerBsPmf(net, policy);
  const double active = ActiveProbability(net);
  Pmf out{1, {}, all.tail_mass / active};
  out.probs.reserve(all.probs.size() - 1);
  for (std::size_t k = 1; k < all.probs.size(); ++k) {
    out.probs.push_back(all.probs[k] / active);
  }
  if (out.probs.empty()) {
    // Only reachable if the anchor sits at zero and the tail is already
    // below epsilon, i.e. practically no BS is active.
    throw TruError(ErrorCode::kTailNotConverged,
                   "active-cell UE-count distribution has no stored mass");
  }
  return out;
}

Pmf DlRequestPmf(std::int64_t ue_count, double p_dl) {
  CheckLoad(ue_count);
  CheckProbability(p_dl);
  const double log_p = std::log(p_dl);
  const double log_q = std::log1p(-p_dl);
  const double log_fact_k = std::lgamma(static_cast<double>(ue_count) + 1.0);

  Pmf out{0, std::vector<double>(static_cast<std::size_t>(ue_count) + 1), 0.0};
  for (std::int64_t m = 0; m <= ue_count; ++m) {
    const double log_choose = log_fact_k - std::lgamma(static_cast<double>(m) + 1.0) -
                              std::lgamma(static_cast<double>(ue_count - m) + 1.0);
    out.probs[static_cast<std::size_t>(m)] =
        std::exp(log_choose + XLogY(m, log_p) + XLogY(ue_count - m, log_q));
  }
  return out;
}

Pmf UlRequestPmf(std::int64_t ue_count, double p_dl) {
  Pmf out = DlRequestPmf(ue_count, p_dl);
  std::reverse(out.probs.begin(), out.probs.end());
  return out;
}

int SubframeSplit(std::int64_t m_dl, std::int64_t ue_count, int frame_len) {
  CheckLoad(ue_count);
  if (m_dl < 0 || m_dl > ue_count) {
    ThrowInvalid(fmt::format("DL request count {} outside [0, {}]", m_dl, ue_count));
  }
  // floor(m T / k + 1/2) in integers; exact at the .5 ties.
  const std::int64_t t = frame_len;
  return static_cast<int>((2 * m_dl * t + ue_count) / (2 * ue_count));
}

Pmf DlSubframePmf(std::int64_t ue_count, double p_dl, int frame_len) {
  if (frame_len < 1) ThrowInvalid("frame_len must be >= 1");
  const Pmf requests = DlRequestPmf(ue_count, p_dl);
  Pmf out{0, std::vector<double>(static_cast<std::size_t>(frame_len) + 1, 0.0), 0.0};
  for (std::int64_t m = 0; m <= ue_count; ++m) {
    out.probs[static_cast<std::size_t>(SubframeSplit(m, ue_count, frame_len))] +=
        requests.probs[static_cast<std::size_t>(m)];
  }
  return out;
}

Pmf UlSubframePmf(std::int64_t ue_count, double p_dl, int frame_len) {
  Pmf out = DlSubframePmf(ue_count, p_dl, frame_len);
  std::reverse(out.probs.begin(), out.probs.end());
  return out;
}

double DlSubframeCmf(std::int64_t ue_count, double p_dl, int frame_len, int n) {
  if (n < 0 || n > frame_len) {
    ThrowInvalid(fmt::format("CMF argument {} outside [0, {}]", n, frame_len));
  }
  return DlSubframePmf(ue_count, p_dl, frame_len).cdf(n);
}

std::vector<double> ConditionalDlTru(std::int64_t ue_count, double p_dl, int frame_len) {
  const Pmf subframes = DlSubframePmf(ue_count, p_dl, frame_len);
  // Suffix sums: P[N^D >= l] for l = T..1.
  std::vector<double> out(static_cast<std::size_t>(frame_len));
  double survival = 0.0;
  for (int l = frame_len; l >= 1; --l) {
    survival += subframes.probs[static_cast<std::size_t>(l)];
    out[static_cast<std::size_t>(l - 1)] = survival;
  }
  return out;
}

TruProfile SubframeTruDynamic(const Pmf& active_load, const TrafficFrameParams& traffic) {
  traffic.Validate();
  CheckActiveLoad(active_load);
  const auto frame = static_cast<std::size_t>(traffic.frame_len);

  TruProfile out{std::vector<double>(frame, 0.0), std::vector<double>(frame, 0.0),
                 active_load.tail_mass};
  for (std::size_t i = 0; i < active_load.probs.size(); ++i) {
    const double weight = active_load.probs[i];
    if (weight == 0.0) continue;
    const std::int64_t k = active_load.support_min + static_cast<std::int64_t>(i);
    const Pmf subframes = DlSubframePmf(k, traffic.p_dl, traffic.frame_len);

    // DL uses subframe l iff N^D >= l; UL otherwise (F_{N^D}(l-1)).
    double survival = 0.0;
    for (std::size_t l = frame; l >= 1; --l) {
      survival += subframes.probs[l];
      out.q_dl[l - 1] += weight * survival;
    }
    double cmf = 0.0;
    for (std::size_t l = 1; l <= frame; ++l) {
      cmf += subframes.probs[l - 1];
      out.q_ul[l - 1] += weight * cmf;
    }
  }
  return out;
}

TruProfile SubframeTruDynamic(const NetworkParams& net, const TrafficFrameParams& traffic,
                              const TailPolicy& policy) {
  return SubframeTruDynamic(UePerActiveBsPmf(net, policy), traffic);
}

TruSummary AverageTruDynamic(const Pmf& active_load, const TrafficFrameParams& traffic) {
  const TruProfile profile = SubframeTruDynamic(active_load, traffic);
  TruSummary out;
  out.mode = DuplexMode::kDynamic;
  for (int l = 0; l < profile.frame_len(); ++l) {
    out.kappa_dl += profile.q_dl[static_cast<std::size_t>(l)];
    out.kappa_ul += profile.q_ul[static_cast<std::size_t>(l)];
  }
  out.kappa_dl /= traffic.frame_len;
  out.kappa_ul /= traffic.frame_len;
  out.kappa = out.kappa_dl + out.kappa_ul;
  out.error_bound = profile.error_bound;
  return out;
}

TruSummary AverageTruDynamic(const NetworkParams& net, const TrafficFrameParams& traffic,
                             const TailPolicy& policy) {
  return AverageTruDynamic(UePerActiveBsPmf(net, policy), traffic);
}

WasteProbabilities StaticWaste(const Pmf& active_load, double p_dl) {
  CheckActiveLoad(active_load);
  CheckProbability(p_dl);
  WasteProbabilities out;
  for (std::size_t i = 0; i < active_load.probs.size(); ++i) {
    const double k = static_cast<double>(active_load.support_min + static_cast<std::int64_t>(i));
    out.dl += std::pow(1.0 - p_dl, k) * active_load.probs[i];
    out.ul += std::pow(p_dl, k) * active_load.probs[i];
  }
  return out;
}

TruSummary AverageTruStatic(const Pmf& active_load, const TrafficFrameParams& traffic) {
  traffic.Validate();
  CheckActiveLoad(active_load);
  // P[at least one request] per direction, summed directly so that the
  // truncated tail does not leak into 1 - waste.
  const double log_none_dl = std::log1p(-traffic.p_dl);
  const double log_none_ul = std::log(traffic.p_dl);
  double busy_dl = 0.0;
  double busy_ul = 0.0;
  for (std::size_t i = 0; i < active_load.probs.size(); ++i) {
    const double k = static_cast<double>(active_load.support_min + static_cast<std::int64_t>(i));
    busy_dl -= std::expm1(k * log_none_dl) * active_load.probs[i];
    busy_ul -= std::expm1(k * log_none_ul) * active_load.probs[i];
  }
  const double frame = traffic.frame_len;
  TruSummary out;
  out.mode = DuplexMode::kStatic;
  out.kappa_dl = busy_dl * traffic.static_dl_subframes / frame;
  out.kappa_ul = busy_ul * traffic.static_ul_subframes() / frame;
  out.kappa = out.kappa_dl + out.kappa_ul;
  out.error_bound = active_load.tail_mass;
  return out;
}

TruSummary AverageTruStatic(const NetworkParams& net, const TrafficFrameParams& traffic,
                            const TailPolicy& policy) {
  return AverageTruStatic(UePerActiveBsPmf(net, policy), traffic);
}

TruGain AdditionalTru(const Pmf& active_load, const TrafficFrameParams& traffic) {
  traffic.Validate();
  CheckActiveLoad(active_load);
  const double n0_dl = traffic.static_dl_subframes;
  const double n0_ul = traffic.static_ul_subframes();

  TruGain out;
  for (std::size_t i = 0; i < active_load.probs.size(); ++i) {
    const double k = static_cast<double>(active_load.support_min + static_cast<std::int64_t>(i));
    out.total += (std::pow(traffic.p_ul(), k) * n0_dl + std::pow(traffic.p_dl, k) * n0_ul) *
                 active_load.probs[i];
  }
  out.total /= traffic.frame_len;

  const TruSummary dynamic = AverageTruDynamic(active_load, traffic);
  const TruSummary fixed = AverageTruStatic(active_load, traffic);
  out.dl = dynamic.kappa_dl - fixed.kappa_dl;
  out.ul = dynamic.kappa_ul - fixed.kappa_ul;
  out.error_bound = active_load.tail_mass;
  return out;
}

TruGain AdditionalTru(const NetworkParams& net, const TrafficFrameParams& traffic,
                      const TailPolicy& policy) {
  return AdditionalTru(UePerActiveBsPmf(net, policy), traffic);
}

TruGain AdditionalTruLimit(const TrafficFrameParams& traffic) {
  traffic.Validate();
  TruGain out;
  out.dl = traffic.p_dl * traffic.static_ul_subframes() / traffic.frame_len;
  out.ul = traffic.p_ul() * traffic.static_dl_subframes / traffic.frame_len;
  out.total = out.dl + out.ul;
  return out;
}

}  // namespace tdd_tru::analytics

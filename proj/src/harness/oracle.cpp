#include <algorithm>
#include <cmath>
#include <cstdlib>

#include <fmt/core.h>

#include "tdd_tru/analytics.hpp"
#include "tdd_tru/harness.hpp"

namespace tdd_tru::harness {
namespace {

// Binomial masses from an explicit Pascal-triangle coefficient and powl.
std::vector<long double> BinomialByCoefficients(std::int64_t k, long double p) {
  std::vector<long double> coeff(static_cast<std::size_t>(k) + 1, 0.0L);
  coeff[0] = 1.0L;
  for (std::int64_t row = 1; row <= k; ++row) {
    for (std::int64_t m = row; m >= 1; --m) {
      coeff[static_cast<std::size_t>(m)] += coeff[static_cast<std::size_t>(m - 1)];
    }
  }
  std::vector<long double> out(coeff.size());
  for (std::int64_t m = 0; m <= k; ++m) {
    // powl(0, 0) == 1 covers the degenerate p endpoints.
    out[static_cast<std::size_t>(m)] = coeff[static_cast<std::size_t>(m)] *
                                       std::pow(p, static_cast<long double>(m)) *
                                       std::pow(1.0L - p, static_cast<long double>(k - m));
  }
  return out;
}

// Subframe count closest to m/k*T; a tie picks the larger count.
int ClosestSplit(std::int64_t m, std::int64_t k, int frame_len) {
  int best = 0;
  long double best_dist = 1e300L;
  const long double target = static_cast<long double>(m) * frame_len / static_cast<long double>(k);
  for (int n = 0; n <= frame_len; ++n) {
    const long double dist = std::abs(target - n);
    if (dist <= best_dist) {
      best = n;
      best_dist = dist;
    }
  }
  return best;
}

ComparisonReport MakeReport(std::string id, std::string series, double tolerance) {
  ComparisonReport r;
  r.scenario_id = std::move(id);
  r.figure_id = "oracle";
  r.series = std::move(series);
  r.tolerance = tolerance;
  r.rule = PassRule::kGapOnly;
  return r;
}

}  // namespace

std::vector<ComparisonReport> OracleSuite(const OracleBounds& bounds) {
  std::vector<ComparisonReport> out;
  for (int frame_len : bounds.frame_lens) {
    for (double p : bounds.p_dls) {
      const std::string tag = fmt::format("T={}/p_dl={:.6g}", frame_len, p);
      ComparisonReport pmf = MakeReport("oracle/dl_subframe_pmf/" + tag, "f_N_dl", bounds.tolerance);
      ComparisonReport cmf = MakeReport("oracle/dl_subframe_cmf/" + tag, "F_N_dl", bounds.tolerance);
      ComparisonReport tru =
          MakeReport("oracle/conditional_tru/" + tag, "q_dl_given_k", bounds.tolerance);

      for (std::int64_t k = 1; k <= bounds.max_load; ++k) {
        const auto requests = BinomialByCoefficients(k, static_cast<long double>(p));
        std::vector<long double> by_count(static_cast<std::size_t>(frame_len) + 1, 0.0L);
        for (std::int64_t m = 0; m <= k; ++m) {
          by_count[static_cast<std::size_t>(ClosestSplit(m, k, frame_len))] +=
              requests[static_cast<std::size_t>(m)];
        }

        const Pmf analytic = analytics::DlSubframePmf(k, p, frame_len);
        const auto conditional = analytics::ConditionalDlTru(k, p, frame_len);
        long double cumulative = 0.0L;
        for (int n = 0; n <= frame_len; ++n) {
          const double x = static_cast<double>(k * 1000 + n);
          cumulative += by_count[static_cast<std::size_t>(n)];
          pmf.x.push_back(x);
          pmf.analytical.push_back(analytic.at(n));
          pmf.empirical.push_back(static_cast<double>(by_count[static_cast<std::size_t>(n)]));
          cmf.x.push_back(x);
          cmf.analytical.push_back(analytics::DlSubframeCmf(k, p, frame_len, n));
          cmf.empirical.push_back(static_cast<double>(cumulative));
        }
        // P[N >= l] recomputed by direct summation for each l.
        for (int l = 1; l <= frame_len; ++l) {
          long double tail = 0.0L;
          for (int n = l; n <= frame_len; ++n) tail += by_count[static_cast<std::size_t>(n)];
          tru.x.push_back(static_cast<double>(k * 1000 + l));
          tru.analytical.push_back(conditional[static_cast<std::size_t>(l - 1)]);
          tru.empirical.push_back(static_cast<double>(tail));
        }
      }
      for (auto* r : {&pmf, &cmf, &tru}) {
        r->samples = bounds.max_load;
        r->note = "x encodes 1000*k + n";
        r->Evaluate();
        out.push_back(std::move(*r));
      }
    }
  }
  return out;
}

}  // namespace tdd_tru::harness

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <tuple>

#include <fmt/core.h>

#include "tdd_tru/error.hpp"
#include "tdd_tru/harness.hpp"

namespace tdd_tru::harness {

namespace {

struct FigureName {
  FigureId id;
  const char* name;
};

constexpr FigureName kFigureNames[] = {
    {FigureId::kPmfKTilde, "pmf_k_tilde"},
    {FigureId::kPmfMDl, "pmf_m_dl"},
    {FigureId::kPmfNDl, "pmf_n_dl"},
    {FigureId::kQlDl, "q_l_dl"},
    {FigureId::kKappaVsLambda, "kappa_vs_lambda"},
};

using Clock = std::chrono::steady_clock;

double SecondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Standard error of a proportion evaluated at the analytical value p, so
// that |p_hat - p| <= z * se is the score (Wilson) interval test; it stays
// meaningful where the empirical mass is 0.
double ScoreSe(double p, std::int64_t n) {
  if (n <= 0) return 0.0;
  const double v = std::clamp(p, 0.0, 1.0);
  return std::sqrt(v * (1.0 - v) / static_cast<double>(n));
}

std::string Cell(double v) { return FormatNumber(v); }
std::string Cell(std::int64_t v) { return std::to_string(v); }

void ApplyFault(const FigureParams& params, ComparisonReport& r) {
  if (params.fault_injection.empty()) return;
  if (r.scenario_id.rfind(params.fault_injection, 0) != 0) return;
  for (double& a : r.analytical) a += 0.05;
  r.note += r.note.empty() ? "fault injected" : "; fault injected";
}

// ci99_halfwidth holds standard errors until here; they are scaled to a
// simultaneous 99% band over the series (Bonferroni).
// `fewest` is the smallest per-point sample count behind the series.
void Finish(const FigureParams& params, ComparisonReport& r, double tolerance, std::int64_t fewest) {
  const double z = SimultaneousZ(r.ci99_halfwidth.size(), 0.99);
  for (double& h : r.ci99_halfwidth) h *= z;
  r.tolerance = tolerance;
  r.rule = params.rule;
  ApplyFault(params, r);
  r.Evaluate();
  if (fewest < params.min_samples) {
    r.passed = false;
    r.note += fmt::format("{}insufficient samples ({} < {})", r.note.empty() ? "" : "; ", fewest,
                          params.min_samples);
  }
}

ComparisonReport StartReport(FigureId figure, std::string scenario, std::string series) {
  ComparisonReport r;
  r.figure_id = ToString(figure);
  r.scenario_id = std::move(scenario);
  r.series = std::move(series);
  return r;
}

sim::SimConfig CampaignConfig(const FigureParams& params, double lambda, DuplexMode mode,
                              double active_cells) {
  sim::SimConfig config;
  config.net = params.Net(lambda);
  config.traffic = params.traffic;
  config.mode = mode;
  config.seed = params.seed;
  config.workers = params.workers;
  const double per_trial = std::min(params.cells_per_trial, active_cells);
  config.region_side = sim::DefaultRegionSide(config.net, per_trial);
  config.trials = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(active_cells / per_trial)));
  std::int64_t max_load = 1;
  for (auto k : params.conditional_loads) max_load = std::max(max_load, k);
  config.max_conditional_load = static_cast<int>(std::max<std::int64_t>(64, max_load));
  return config;
}

// Load-conditioned histograms do not depend on geometry, so the dynamic
// campaigns of every PMF density are pooled.
sim::CampaignTally PooledTally(const FigureParams& params, CampaignCache& cache,
                               std::int64_t* campaigns) {
  sim::CampaignTally pooled;
  *campaigns = 0;
  for (double lambda : params.pmf_lambdas) {
    pooled.Merge(cache.Get(params, lambda, DuplexMode::kDynamic, params.active_cells).tally);
    ++*campaigns;
  }
  return pooled;
}

FigureResult PmfKTilde(const FigureParams& params, CampaignCache& cache) {
  FigureResult out{FigureId::kPmfKTilde, {}, {}};
  out.table.columns = {"lambda", "k", "analytical", "empirical"};
  for (double lambda : params.pmf_lambdas) {
    const auto start = Clock::now();
    const Pmf analytic = analytics::UePerActiveBsPmf(params.Net(lambda), params.policy);
    std::int64_t k_last = 1;
    while (k_last < analytic.support_max() && analytic.cdf(k_last) < 1.0 - 1e-9) ++k_last;

    Pmf empirical;
    std::int64_t n = 0;
    if (params.simulate) {
      const auto& result = cache.Get(params, lambda, DuplexMode::kDynamic, params.active_cells);
      empirical = result.tally.UePerActiveBs();
      n = result.tally.active_cells();
      k_last = std::max(k_last, empirical.support_max());
    }
    auto report = StartReport(FigureId::kPmfKTilde, fmt::format("pmf_k_tilde/lambda={}", lambda),
                              "f_K_tilde");
    for (std::int64_t k = 1; k <= k_last; ++k) {
      std::vector<std::string> row = {Cell(lambda), Cell(k), Cell(analytic.at(k)), ""};
      if (params.simulate) {
        row[3] = Cell(empirical.at(k));
        report.x.push_back(static_cast<double>(k));
        report.analytical.push_back(analytic.at(k));
        report.empirical.push_back(empirical.at(k));
        report.ci99_halfwidth.push_back(ScoreSe(analytic.at(k), n));
      }
      out.table.rows.push_back(std::move(row));
    }
    if (params.simulate) {
      report.samples = n;
      report.runtime_seconds = SecondsSince(start);
      Finish(params, report, params.pmf_tolerance, n);
      out.reports.push_back(std::move(report));
    }
  }
  return out;
}

FigureResult ConditionalPmf(FigureId figure, const FigureParams& params, CampaignCache& cache) {
  const bool requests = figure == FigureId::kPmfMDl;
  FigureResult out{figure, {}, {}};
  out.table.columns = {"k", requests ? "m" : "n", "analytical", "empirical"};
  const auto start = Clock::now();
  sim::CampaignTally pooled;
  std::int64_t campaigns = 0;
  if (params.simulate) pooled = PooledTally(params, cache, &campaigns);
  const double pooled_seconds = SecondsSince(start);

  for (std::int64_t k : params.conditional_loads) {
    const Pmf analytic = requests
                             ? analytics::DlRequestPmf(k, params.traffic.p_dl)
                             : analytics::DlSubframePmf(k, params.traffic.p_dl, params.traffic.frame_len);
    const std::int64_t upper = requests ? k : params.traffic.frame_len;
    const std::int64_t n = params.simulate ? pooled.SamplesWithLoad(k) : 0;
    Pmf empirical;
    if (n > 0) empirical = requests ? pooled.DlRequestsGivenLoad(k) : pooled.DlSubframesGivenLoad(k);

    auto report = StartReport(figure, fmt::format("{}/k={}", ToString(figure), k),
                              requests ? "f_M_dl" : "f_N_dl");
    for (std::int64_t x = 0; x <= upper; ++x) {
      std::vector<std::string> row = {Cell(k), Cell(x), Cell(analytic.at(x)), ""};
      if (params.simulate) {
        const double e = n > 0 ? empirical.at(x) : 0.0;
        row[3] = Cell(e);
        report.x.push_back(static_cast<double>(x));
        report.analytical.push_back(analytic.at(x));
        report.empirical.push_back(e);
        report.ci99_halfwidth.push_back(ScoreSe(analytic.at(x), n));
      }
      out.table.rows.push_back(std::move(row));
    }
    if (params.simulate) {
      report.samples = n;
      report.runtime_seconds = pooled_seconds;
      report.note = fmt::format("pooled over {} dynamic campaigns", campaigns);
      Finish(params, report, params.pmf_tolerance, n);
      out.reports.push_back(std::move(report));
    }
  }
  return out;
}

FigureResult QlDl(const FigureParams& params, CampaignCache& cache) {
  FigureResult out{FigureId::kQlDl, {}, {}};
  out.table.columns = {"lambda", "l", "q_dl", "q_dl_hat", "q_ul", "q_ul_hat"};
  for (double lambda : params.pmf_lambdas) {
    const auto start = Clock::now();
    const auto profile =
        analytics::SubframeTruDynamic(params.Net(lambda), params.traffic, params.policy);
    sim::TruEstimate estimate;
    if (params.simulate) {
      estimate = cache.Get(params, lambda, DuplexMode::kDynamic, params.active_cells).estimate;
    }
    auto dl = StartReport(FigureId::kQlDl, fmt::format("q_l_dl/lambda={}/dl", lambda), "q_dl");
    auto ul = StartReport(FigureId::kQlDl, fmt::format("q_l_dl/lambda={}/ul", lambda), "q_ul");
    for (int l = 1; l <= profile.frame_len(); ++l) {
      const auto i = static_cast<std::size_t>(l - 1);
      std::vector<std::string> row = {Cell(lambda), Cell(std::int64_t{l}), Cell(profile.q_dl[i]), "",
                                      Cell(profile.q_ul[i]), ""};
      if (params.simulate) {
        row[3] = Cell(estimate.q_dl_hat[i]);
        row[5] = Cell(estimate.q_ul_hat[i]);
        for (auto [r, a, e] : {std::tuple{&dl, profile.q_dl[i], estimate.q_dl_hat[i]},
                               std::tuple{&ul, profile.q_ul[i], estimate.q_ul_hat[i]}}) {
          r->x.push_back(l);
          r->analytical.push_back(a);
          r->empirical.push_back(e);
          r->ci99_halfwidth.push_back(ScoreSe(a, estimate.n_active_cells));
        }
      }
      out.table.rows.push_back(std::move(row));
    }
    if (params.simulate) {
      for (auto* r : {&dl, &ul}) {
        r->samples = estimate.n_active_cells;
        r->runtime_seconds = SecondsSince(start);
        if (profile.error_bound > 0.0) {
          r->note = fmt::format("analytical truncation bound {:.3g}", profile.error_bound);
        }
        Finish(params, *r, params.tru_tolerance, estimate.n_active_cells);
        out.reports.push_back(std::move(*r));
      }
    }
  }
  return out;
}

FigureResult KappaVsLambda(const FigureParams& params, CampaignCache& cache) {
  FigureResult out{FigureId::kKappaVsLambda, {}, {}};
  out.table.columns = {"lambda",          "kappa_dynamic",     "kappa_static",
                       "kappa_static_dl", "kappa_static_ul",   "kappa_add",
                       "kappa_add_dl",    "kappa_add_ul",      "kappa_add_limit",
                       "kappa_dynamic_hat", "kappa_static_hat", "kappa_static_dl_hat",
                       "kappa_static_ul_hat", "kappa_add_hat"};
  const auto limit = analytics::AdditionalTruLimit(params.traffic);
  const auto start = Clock::now();
  const auto id = [](const char* series) { return fmt::format("kappa_vs_lambda/{}", series); };
  auto dyn = StartReport(FigureId::kKappaVsLambda, id("dynamic"), "kappa_dynamic");
  auto stat = StartReport(FigureId::kKappaVsLambda, id("static"), "kappa_static");
  auto stat_dl = StartReport(FigureId::kKappaVsLambda, id("static_dl"), "kappa_static_dl");
  auto stat_ul = StartReport(FigureId::kKappaVsLambda, id("static_ul"), "kappa_static_ul");
  auto add = StartReport(FigureId::kKappaVsLambda, id("additional"), "kappa_add");
  std::int64_t samples = 0;
  std::int64_t fewest = std::numeric_limits<std::int64_t>::max();
  for (double lambda : params.sweep_lambdas) {
    const auto net = params.Net(lambda);
    const Pmf load = analytics::UePerActiveBsPmf(net, params.policy);
    const auto d = analytics::AverageTruDynamic(load, params.traffic);
    const auto s = analytics::AverageTruStatic(load, params.traffic);
    const auto g = analytics::AdditionalTru(load, params.traffic);
    std::vector<std::string> row = {Cell(lambda),  Cell(d.kappa), Cell(s.kappa), Cell(s.kappa_dl),
                                    Cell(s.kappa_ul), Cell(g.total), Cell(g.dl),  Cell(g.ul),
                                    Cell(limit.total), "", "", "", "", ""};
    if (params.simulate) {
      const auto& ed =
          cache.Get(params, lambda, DuplexMode::kDynamic, params.sweep_active_cells).estimate;
      const auto& es =
          cache.Get(params, lambda, DuplexMode::kStatic, params.sweep_active_cells).estimate;
      samples += ed.n_active_cells + es.n_active_cells;
      fewest = std::min({fewest, ed.n_active_cells, es.n_active_cells});
      row[9] = Cell(ed.kappa_hat);
      row[10] = Cell(es.kappa_hat);
      row[11] = Cell(es.kappa_dl_hat);
      row[12] = Cell(es.kappa_ul_hat);
      row[13] = Cell(ed.kappa_hat - es.kappa_hat);
      const auto se = [](double ci95) { return ci95 / 1.96; };
      for (auto [r, a, e, h] : {
               std::tuple{&dyn, d.kappa, ed.kappa_hat, se(ed.ci95_halfwidth.kappa)},
               std::tuple{&stat, s.kappa, es.kappa_hat, se(es.ci95_halfwidth.kappa)},
               std::tuple{&stat_dl, s.kappa_dl, es.kappa_dl_hat, se(es.ci95_halfwidth.kappa_dl)},
               std::tuple{&stat_ul, s.kappa_ul, es.kappa_ul_hat, se(es.ci95_halfwidth.kappa_ul)},
               std::tuple{&add, g.total, ed.kappa_hat - es.kappa_hat,
                          std::hypot(se(ed.ci95_halfwidth.kappa), se(es.ci95_halfwidth.kappa))},
           }) {
        r->x.push_back(lambda);
        r->analytical.push_back(a);
        r->empirical.push_back(e);
        r->ci99_halfwidth.push_back(h);
      }
    }
    out.table.rows.push_back(std::move(row));
  }
  if (params.simulate) {
    for (auto* r : {&dyn, &stat, &stat_dl, &stat_ul, &add}) {
      r->samples = samples;
      r->runtime_seconds = SecondsSince(start);
      Finish(params, *r, params.tru_tolerance, fewest);
      out.reports.push_back(std::move(*r));
    }
  }
  return out;
}

}  // namespace

const char* ToString(FigureId id) {
  for (const auto& f : kFigureNames) {
    if (f.id == id) return f.name;
  }
  return "?";
}

FigureId ParseFigureId(const std::string& text) {
  for (const auto& f : kFigureNames) {
    if (text == f.name) return f.id;
  }
  ThrowInvalid(fmt::format("unknown figure id '{}'", text));
}

std::vector<FigureId> AllFigures() {
  std::vector<FigureId> out;
  for (const auto& f : kFigureNames) out.push_back(f.id);
  return out;
}

const sim::CampaignResult& CampaignCache::Get(const FigureParams& params, double lambda,
                                              DuplexMode mode, double active_cells) {
  const sim::SimConfig config = CampaignConfig(params, lambda, mode, active_cells);
  // Everything that changes the simulated sample; workers do not.
  const std::string key = fmt::format(
      "{}|{}|{}|{}|{}|{}|{}|{}|{}|{}|{}", config.net.lambda, config.net.rho, config.net.q,
      config.traffic.p_dl, config.traffic.frame_len, config.traffic.static_dl_subframes,
      config.region_side, config.trials, config.seed, ToString(config.mode),
      config.max_conditional_load);
  auto it = results_.find(key);
  if (it == results_.end()) it = results_.emplace(key, sim::RunCampaign(config)).first;
  return it->second;
}

FigureResult ReproduceFigure(FigureId figure, const FigureParams& params, CampaignCache* cache) {
  params.traffic.Validate();
  params.policy.Validate();
  if (!(params.active_cells >= 1.0) || !(params.sweep_active_cells >= 1.0) ||
      !(params.cells_per_trial >= 1.0)) {
    ThrowInvalid("sample budgets must be >= 1 active cell");
  }
  for (auto k : params.conditional_loads) {
    if (k < 1) ThrowInvalid(fmt::format("conditional load must be >= 1 (got {})", k));
  }
  CampaignCache local;
  CampaignCache& c = cache ? *cache : local;
  switch (figure) {
    case FigureId::kPmfKTilde: return PmfKTilde(params, c);
    case FigureId::kPmfMDl:
    case FigureId::kPmfNDl: return ConditionalPmf(figure, params, c);
    case FigureId::kQlDl: return QlDl(params, c);
    case FigureId::kKappaVsLambda: return KappaVsLambda(params, c);
  }
  ThrowInvalid("unknown figure id");
}

}  // namespace tdd_tru::harness

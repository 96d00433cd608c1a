#include <cmath>
#include <sstream>

#include <fmt/core.h>

#include "internal.hpp"
#include "tdd_tru/analytics.hpp"
#include "tdd_tru/cli.hpp"
#include "tdd_tru/error.hpp"
#include "tdd_tru/simulator.hpp"

namespace tdd_tru::cli::detail {

using harness::FormatNumber;
using harness::RoundForOutput;
using harness::Table;
using nlohmann::json;

namespace {

json Rounded(const std::vector<double>& values) {
  json out = json::array();
  for (double v : values) out.push_back(RoundForOutput(v));
  return out;
}

json ModelJson(const ModelOptions& m) {
  return {{"rho", m.rho}, {"q", m.q}, {"p_dl", m.p_dl}, {"frame_len", m.frame_len}, {"n0_dl", m.n0_dl}};
}

json SummaryJson(const analytics::TruSummary& s) {
  return {{"kappa_dl", RoundForOutput(s.kappa_dl)},
          {"kappa_ul", RoundForOutput(s.kappa_ul)},
          {"kappa", RoundForOutput(s.kappa)},
          {"error_bound", RoundForOutput(s.error_bound)}};
}

json GainJson(const analytics::TruGain& g) {
  return {{"dl", RoundForOutput(g.dl)},
          {"ul", RoundForOutput(g.ul)},
          {"total", RoundForOutput(g.total)},
          {"error_bound", RoundForOutput(g.error_bound)}};
}

void Emit(CommandOutcome& outcome, const std::string& out_dir, const std::string& name,
          const std::string& content) {
  WriteTextFile(out_dir, name, content);
  outcome.outputs.push_back(name);
}

std::vector<int> IntegerGrid(const std::string& spec, const char* what) {
  std::vector<int> out;
  for (double v : ParseGrid(spec)) {
    if (v != std::floor(v) || std::abs(v) > 1e6) {
      ThrowInvalid(fmt::format("{} grid needs integers (got {})", what, v));
    }
    out.push_back(static_cast<int>(v));
  }
  return out;
}

}  // namespace

CommandOutcome Analyze(const AnalyzeOptions& o, std::ostream& out) {
  const NetworkParams net{o.lambda, o.model.rho, o.model.q};
  const TrafficFrameParams traffic = o.model.Traffic();
  const TailPolicy policy{o.tail_epsilon, TailPolicy{}.k_max};
  net.Validate();
  traffic.Validate();
  policy.Validate();

  const Pmf load = analytics::UePerActiveBsPmf(net, policy);
  const auto profile = analytics::SubframeTruDynamic(load, traffic);
  const auto dyn = analytics::AverageTruDynamic(load, traffic);
  const auto stat = analytics::AverageTruStatic(load, traffic);
  const auto waste = analytics::StaticWaste(load, traffic.p_dl);
  const auto add = analytics::AdditionalTru(load, traffic);
  const auto limit = analytics::AdditionalTruLimit(traffic);

  CommandOutcome outcome;
  outcome.parameters = ModelJson(o.model);
  outcome.parameters["lambda"] = o.lambda;
  outcome.parameters["tail_epsilon"] = o.tail_epsilon;
  outcome.parameters["out_dir"] = o.out_dir;

  Table tru{{"l", "q_dl", "q_ul"}, {}};
  for (int l = 1; l <= profile.frame_len(); ++l) {
    const auto i = static_cast<std::size_t>(l - 1);
    tru.rows.push_back({std::to_string(l), FormatNumber(profile.q_dl[i]), FormatNumber(profile.q_ul[i])});
  }
  Emit(outcome, o.out_dir, "profile.csv", VersionedCsv("profile", tru));

  Table summary{SummaryColumns(), {SummaryRow(net, traffic, policy)}};
  Emit(outcome, o.out_dir, "summary.csv", VersionedCsv("summary", summary));

  const json doc = {
      {"schema", "tdd-tru/analysis"},
      {"schema_version", kCsvSchemaVersion},
      {"active_bs_density", RoundForOutput(analytics::ActiveBsDensity(net))},
      {"active_probability", RoundForOutput(analytics::ActiveProbability(net))},
      {"load_support_max", load.support_max()},
      {"load_tail_mass", RoundForOutput(load.tail_mass)},
      {"q_dl", Rounded(profile.q_dl)},
      {"q_ul", Rounded(profile.q_ul)},
      {"profile_error_bound", RoundForOutput(profile.error_bound)},
      {"dynamic", SummaryJson(dyn)},
      {"static", SummaryJson(stat)},
      {"static_waste", {{"dl", RoundForOutput(waste.dl)}, {"ul", RoundForOutput(waste.ul)}}},
      {"additional", GainJson(add)},
      {"additional_limit", GainJson(limit)},
      {"gain_ratio", stat.kappa > 0.0 ? json(RoundForOutput(add.total / stat.kappa)) : json()},
  };
  Emit(outcome, o.out_dir, "summary.json", JsonText(doc));

  out << fmt::format("active BS density  {} /km^2\n", FormatNumber(analytics::ActiveBsDensity(net)));
  out << "q_dl              ";
  for (double v : profile.q_dl) out << ' ' << fmt::format("{:.4f}", v);
  out << '\n';
  out << fmt::format("kappa dynamic      {}\n", FormatNumber(dyn.kappa));
  out << fmt::format("kappa static       {} (dl {}, ul {})\n", FormatNumber(stat.kappa),
                     FormatNumber(stat.kappa_dl), FormatNumber(stat.kappa_ul));
  out << fmt::format("kappa additional   {} (dl {}, ul {}; limit {})\n", FormatNumber(add.total),
                     FormatNumber(add.dl), FormatNumber(add.ul), FormatNumber(limit.total));
  out << fmt::format("truncation bound   {}\n", FormatNumber(add.error_bound));
  return outcome;
}

CommandOutcome Simulate(const SimulateOptions& o, std::ostream& out) {
  sim::SimConfig config;
  config.net = NetworkParams{o.lambda, o.model.rho, o.model.q};
  config.traffic = o.model.Traffic();
  config.net.Validate();
  config.traffic.Validate();
  config.mode = ParseDuplexMode(o.mode);
  config.region_side = o.region_side > 0.0 ? o.region_side : sim::DefaultRegionSide(config.net);
  config.trials = o.trials;
  config.seed = o.seed;
  config.workers = o.workers;
  config.keep_records = o.records;
  config.Validate();
  for (const auto& w : config.Warnings()) out << "warning: " << w << '\n';

  const auto result = sim::RunCampaign(config);
  const auto& est = result.estimate;
  const auto& tally = result.tally;

  CommandOutcome outcome;
  outcome.parameters = ModelJson(o.model);
  outcome.parameters["lambda"] = o.lambda;
  outcome.parameters["mode"] = o.mode;
  outcome.parameters["region_side"] = config.region_side;
  outcome.parameters["trials"] = o.trials;
  outcome.parameters["seed"] = o.seed;
  outcome.parameters["workers"] = o.workers;
  outcome.parameters["records"] = o.records;
  outcome.parameters["out_dir"] = o.out_dir;

  Table tru{{"l", "q_dl_hat", "q_ul_hat", "ci95_dl", "ci95_ul"}, {}};
  for (std::size_t i = 0; i < est.q_dl_hat.size(); ++i) {
    tru.rows.push_back({std::to_string(i + 1), FormatNumber(est.q_dl_hat[i]), FormatNumber(est.q_ul_hat[i]),
                        FormatNumber(est.ci95_halfwidth.q_dl[i]), FormatNumber(est.ci95_halfwidth.q_ul[i])});
  }
  Emit(outcome, o.out_dir, "tru_hat.csv", VersionedCsv("tru_hat", tru));

  const Pmf all = tally.UePerBs();
  const Pmf active = tally.UePerActiveBs();
  Table ue{{"k", "f_k_hat", "f_k_tilde_hat"}, {}};
  for (std::int64_t k = 0; k <= all.support_max(); ++k) {
    ue.rows.push_back({std::to_string(k), FormatNumber(all.at(k)), k == 0 ? "" : FormatNumber(active.at(k))});
  }
  Emit(outcome, o.out_dir, "ue_pmf.csv", VersionedCsv("ue_pmf", ue));

  Table m_given{{"k", "samples", "m", "f_m_dl_hat"}, {}};
  Table n_given{{"k", "samples", "n", "f_n_dl_hat"}, {}};
  for (std::int64_t k = 1; k <= tally.max_conditional_load(); ++k) {
    const auto n = tally.SamplesWithLoad(k);
    if (n == 0) continue;
    const Pmf m_pmf = tally.DlRequestsGivenLoad(k);
    const Pmf n_pmf = tally.DlSubframesGivenLoad(k);
    for (std::int64_t m = 0; m <= k; ++m) {
      m_given.rows.push_back({std::to_string(k), std::to_string(n), std::to_string(m), FormatNumber(m_pmf.at(m))});
    }
    for (std::int64_t s = 0; s <= config.traffic.frame_len; ++s) {
      n_given.rows.push_back({std::to_string(k), std::to_string(n), std::to_string(s), FormatNumber(n_pmf.at(s))});
    }
  }
  Emit(outcome, o.out_dir, "m_dl_given_k.csv", VersionedCsv("m_dl_given_k", m_given));
  Emit(outcome, o.out_dir, "n_dl_given_k.csv", VersionedCsv("n_dl_given_k", n_given));

  const json doc = {
      {"schema", "tdd-tru/estimate"},
      {"schema_version", kCsvSchemaVersion},
      {"mode", o.mode},
      {"trials", result.trials},
      {"total_bs", tally.total_bs()},
      {"total_ue", result.total_ue},
      {"n_active_cells", est.n_active_cells},
      {"skipped_realizations", result.skipped_realizations},
      {"q_dl_hat", Rounded(est.q_dl_hat)},
      {"q_ul_hat", Rounded(est.q_ul_hat)},
      {"kappa_dl_hat", RoundForOutput(est.kappa_dl_hat)},
      {"kappa_ul_hat", RoundForOutput(est.kappa_ul_hat)},
      {"kappa_hat", RoundForOutput(est.kappa_hat)},
      {"ci95_halfwidth",
       {{"q_dl", Rounded(est.ci95_halfwidth.q_dl)},
        {"q_ul", Rounded(est.ci95_halfwidth.q_ul)},
        {"kappa_dl", RoundForOutput(est.ci95_halfwidth.kappa_dl)},
        {"kappa_ul", RoundForOutput(est.ci95_halfwidth.kappa_ul)},
        {"kappa", RoundForOutput(est.ci95_halfwidth.kappa)}}},
  };
  Emit(outcome, o.out_dir, "estimate.json", JsonText(doc));

  if (o.records) {
    std::ostringstream csv;
    sim::WriteCellRecordsCsv(csv, result.records);
    Emit(outcome, o.out_dir, "records.csv", csv.str());
  }

  out << fmt::format("active cells       {} over {} trials ({} redrawn)\n", est.n_active_cells,
                     result.trials, result.skipped_realizations);
  out << "q_dl_hat          ";
  for (double v : est.q_dl_hat) out << ' ' << fmt::format("{:.4f}", v);
  out << '\n';
  out << fmt::format("kappa_hat          {} (dl {}, ul {}) +/- {}\n", FormatNumber(est.kappa_hat),
                     FormatNumber(est.kappa_dl_hat), FormatNumber(est.kappa_ul_hat),
                     FormatNumber(est.ci95_halfwidth.kappa));
  return outcome;
}

CommandOutcome Validate(const ValidateOptions& o, std::ostream& out) {
  harness::FigureParams params;
  params.rho = o.model.rho;
  params.q = o.model.q;
  params.traffic = o.model.Traffic();
  params.active_cells = o.budget;
  params.sweep_active_cells = o.sweep_budget;
  params.cells_per_trial = o.cells_per_trial;
  params.seed = o.seed;
  params.workers = o.workers;
  params.rule = harness::ParsePassRule(o.rule);
  params.fault_injection = o.inject_fault;
  NetworkParams{1.0, params.rho, params.q}.Validate();

  std::vector<harness::FigureId> figures;
  for (const auto& name : o.figures) figures.push_back(harness::ParseFigureId(name));
  if (figures.empty()) figures = harness::AllFigures();

  CommandOutcome outcome;
  outcome.parameters = ModelJson(o.model);
  outcome.parameters["budget"] = o.budget;
  outcome.parameters["sweep_budget"] = o.sweep_budget;
  outcome.parameters["cells_per_trial"] = o.cells_per_trial;
  outcome.parameters["seed"] = o.seed;
  outcome.parameters["workers"] = o.workers;
  outcome.parameters["rule"] = o.rule;
  outcome.parameters["figures"] = o.figures;
  outcome.parameters["skip_oracle"] = o.skip_oracle;
  outcome.parameters["inject_fault"] = o.inject_fault;
  outcome.parameters["out_dir"] = o.out_dir;

  std::vector<harness::ComparisonReport> reports;
  if (!o.skip_oracle) {
    for (auto& r : harness::OracleSuite()) {
      if (!o.inject_fault.empty() && r.scenario_id.rfind(o.inject_fault, 0) == 0) {
        for (double& a : r.analytical) a += 0.05;
        r.note += "; fault injected";
        r.Evaluate();
      }
      reports.push_back(std::move(r));
    }
  }
  harness::CampaignCache cache;
  for (auto id : figures) {
    auto fig = harness::ReproduceFigure(id, params, &cache);
    Emit(outcome, o.out_dir, std::string(ToString(id)) + ".csv", VersionedCsv(ToString(id), fig.table));
    for (auto& r : fig.reports) reports.push_back(std::move(r));
  }

  const json doc = harness::ReportsToJson(reports);
  Emit(outcome, o.out_dir, "report.json", JsonText(doc));

  int failed = 0;
  for (const auto& r : reports) {
    if (!r.passed) ++failed;
    out << fmt::format("{} {} max_gap={:.3g} tol={} rule={} n={}{}\n", r.passed ? "PASS" : "FAIL",
                       r.scenario_id, r.max_abs_gap, FormatNumber(r.tolerance), ToString(r.rule),
                       r.samples, r.note.empty() ? "" : " [" + r.note + "]");
  }
  out << fmt::format("{} of {} checks passed\n", reports.size() - static_cast<std::size_t>(failed),
                     reports.size());
  if (failed > 0) {
    for (const auto& r : reports) {
      if (!r.passed) out << "failing scenario: " << r.scenario_id << '\n';
    }
  }
  outcome.exit_code = failed > 0 ? kExitValidationFailed : kExitOk;
  return outcome;
}

CommandOutcome Sweep(const SweepOptions& o, std::ostream& out) {
  const auto lambdas = ParseGrid(o.lambda);
  const auto rhos = ParseGrid(o.rho);
  const auto qs = ParseGrid(o.q);
  const auto p_dls = o.p_dl.empty() ? std::vector<double>{2.0 / 3.0} : ParseGrid(o.p_dl);
  const auto frame_lens = IntegerGrid(o.frame_len, "frame-len");
  const auto n0_dls = IntegerGrid(o.n0_dl, "n0-dl");
  const TailPolicy policy{o.tail_epsilon, TailPolicy{}.k_max};
  policy.Validate();

  CommandOutcome outcome;
  outcome.parameters = {{"lambda", o.lambda},     {"rho", o.rho},         {"q", o.q},
                        {"p_dl", o.p_dl},         {"frame_len", o.frame_len}, {"n0_dl", o.n0_dl},
                        {"tail_epsilon", o.tail_epsilon}, {"out_dir", o.out_dir}};

  Table table{SummaryColumns(), {}};
  for (double rho : rhos) {
    for (double q : qs) {
      for (double p : p_dls) {
        for (int frame_len : frame_lens) {
          for (int n0 : n0_dls) {
            for (double lambda : lambdas) {
              table.rows.push_back(SummaryRow({lambda, rho, q}, {p, frame_len, n0}, policy));
            }
          }
        }
      }
    }
  }
  Emit(outcome, o.out_dir, "sweep.csv", VersionedCsv("summary", table));
  out << fmt::format("{} grid points written to {}/sweep.csv\n", table.rows.size(), o.out_dir);
  return outcome;
}

}  // namespace tdd_tru::cli::detail

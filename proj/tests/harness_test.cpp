#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "tdd_tru/error.hpp"
#include "tdd_tru/harness.hpp"

using namespace tdd_tru;
using namespace tdd_tru::harness;

namespace {

FigureParams AnalyticOnly() {
  FigureParams p;
  p.simulate = false;
  return p;
}

// Budgets small enough for a unit test; the CI rule absorbs the noise.
FigureParams SmallBudget() {
  FigureParams p;
  p.active_cells = 2e4;
  p.sweep_active_cells = 5e3;
  p.cells_per_trial = 1e4;
  p.sweep_lambdas = {100.0, 1000.0};
  p.workers = 1;
  p.seed = 11;
  return p;
}

const ComparisonReport* Find(const std::vector<ComparisonReport>& reports, const std::string& id) {
  for (const auto& r : reports) {
    if (r.scenario_id == id) return &r;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("pass rule: gap only ignores the interval") {
  ComparisonReport r;
  r.analytical = {0.5, 0.2};
  r.empirical = {0.51, 0.2};
  r.ci99_halfwidth = {0.02, 0.02};
  r.tolerance = 0.005;
  r.rule = PassRule::kGapOnly;
  r.Evaluate();
  CHECK(r.max_abs_gap == doctest::Approx(0.01));
  CHECK_FALSE(r.passed);

  r.rule = PassRule::kGapOrCi;
  r.Evaluate();
  CHECK(r.passed);

  r.ci99_halfwidth = {0.005, 0.02};
  r.Evaluate();
  CHECK_FALSE(r.passed);

  r.tolerance = 0.011;
  r.Evaluate();
  CHECK(r.passed);
}

TEST_CASE("pass rule: mismatched series are rejected") {
  ComparisonReport r;
  r.analytical = {1.0};
  CHECK_THROWS_AS(r.Evaluate(), TruError);
}

TEST_CASE("report JSON round trip") {
  ComparisonReport r;
  r.scenario_id = "q_l_dl/lambda=50/dl";
  r.figure_id = "q_l_dl";
  r.series = "q_dl";
  r.x = {1, 2};
  r.analytical = {0.123456789012345678, 0.5};
  r.empirical = {0.12, 0.49};
  r.ci99_halfwidth = {0.01, 0.01};
  r.tolerance = 0.003;
  r.rule = PassRule::kGapOrCi;
  r.samples = 42;
  r.runtime_seconds = 1.5;
  r.note = "n";
  r.Evaluate();

  const auto doc = ReportsToJson({r});
  CHECK(doc.at("schema_version") == kReportSchemaVersion);
  CHECK(doc.at("passed") == r.passed);
  const auto back = ReportsFromJson(nlohmann::json::parse(doc.dump()));
  REQUIRE(back.size() == 1);
  CHECK(back[0].scenario_id == r.scenario_id);
  CHECK(back[0].analytical[0] == 0.123456789012);
  CHECK(back[0].rule == PassRule::kGapOrCi);
  CHECK(back[0].samples == 42);
  CHECK(back[0].passed == r.passed);
  CHECK(ToJson(back[0]) == ToJson(r));

  auto wrong = doc;
  wrong["schema_version"] = 99;
  CHECK_THROWS_AS(ReportsFromJson(wrong), TruError);
}

TEST_CASE("number formatting uses twelve significant digits") {
  CHECK(FormatNumber(2.0 / 3.0) == "0.666666666667");
  CHECK(FormatNumber(1e4) == "10000");
  CHECK(FormatNumber(-0.0) == "0");
  CHECK(FormatNumber(1.25e-15) == "1.25e-15");
  CHECK(RoundForOutput(2.0 / 3.0) == 0.666666666667);
}

TEST_CASE("figure ids parse and print") {
  for (auto id : AllFigures()) CHECK(ParseFigureId(ToString(id)) == id);
  CHECK(AllFigures().size() == 5);
  CHECK_THROWS_AS(ParseFigureId("fig9"), TruError);
  CHECK(ParsePassRule("gap") == PassRule::kGapOnly);
  CHECK_THROWS_AS(ParsePassRule("loose"), TruError);
}

TEST_CASE("oracle suite agrees to 1e-12") {
  const auto reports = OracleSuite();
  CHECK(reports.size() == 4 * 4 * 3);
  for (const auto& r : reports) {
    CAPTURE(r.scenario_id);
    CHECK(r.passed);
    CHECK(r.max_abs_gap <= 1e-12);
  }
}

TEST_CASE("oracle: one-subframe frames split at half the load") {
  OracleBounds b;
  b.frame_lens = {1};
  b.p_dls = {0.25};
  b.max_load = 4;
  const auto reports = OracleSuite(b);
  const auto* pmf = Find(reports, "oracle/dl_subframe_pmf/T=1/p_dl=0.25");
  REQUIRE(pmf != nullptr);
  // k=2: m=1 sits exactly on 0.5 and rounds up, so P[N=1] = 1 - 0.75^2.
  REQUIRE(pmf->x[3] == 2001);
  CHECK(pmf->empirical[3] == doctest::Approx(1.0 - 0.5625).epsilon(1e-15));
  CHECK(pmf->analytical[3] == doctest::Approx(1.0 - 0.5625).epsilon(1e-15));
  CHECK(pmf->passed);
}

TEST_CASE("oracle: single UE is Bernoulli over the frame") {
  OracleBounds b;
  b.max_load = 1;
  b.frame_lens = {10};
  b.p_dls = {2.0 / 3.0};
  const auto reports = OracleSuite(b);
  const auto* tru = Find(reports, "oracle/conditional_tru/T=10/p_dl=0.666667");
  REQUIRE(tru != nullptr);
  REQUIRE(tru->analytical.size() == 10);
  for (double v : tru->analytical) CHECK(v == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("pmf_n_dl analytical table contains the worked example") {
  const auto fig = ReproduceFigure(FigureId::kPmfNDl, AnalyticOnly());
  CHECK(fig.reports.empty());
  CHECK(fig.table.columns == std::vector<std::string>{"k", "n", "analytical", "empirical"});
  CHECK(fig.table.rows.size() == 3 * 11);
  bool found = false;
  for (const auto& row : fig.table.rows) {
    if (row[0] == "12" && row[1] == "8") {
      found = true;
      CHECK(std::stod(row[2]) == doctest::Approx(0.339).epsilon(0.003));
      CHECK(row[3].empty());
    }
  }
  CHECK(found);
}

TEST_CASE("pmf_m_dl analytical table covers 0..k") {
  const auto fig = ReproduceFigure(FigureId::kPmfMDl, AnalyticOnly());
  CHECK(fig.table.rows.size() == 2 + 5 + 13);
  for (const auto& row : fig.table.rows) {
    if (row[0] == "12" && row[1] == "9") CHECK(std::stod(row[2]) == doctest::Approx(0.2119520323));
  }
}

TEST_CASE("q_l_dl at lambda=1000 stays near the DL request probability") {
  auto params = AnalyticOnly();
  params.pmf_lambdas = {1000.0};
  const auto fig = ReproduceFigure(FigureId::kQlDl, params);
  REQUIRE(fig.table.rows.size() == 10);
  double lo = 1.0, hi = 0.0;
  for (const auto& row : fig.table.rows) {
    const double q = std::stod(row[2]);
    CHECK(std::abs(q - 2.0 / 3.0) < 0.05);
    lo = std::min(lo, q);
    hi = std::max(hi, q);
  }
  CHECK(hi - lo < 0.09);
}

TEST_CASE("kappa_vs_lambda analytic gain at 1e4") {
  auto params = AnalyticOnly();
  params.sweep_lambdas = {10.0, 100.0, 1000.0, 10000.0};
  const auto fig = ReproduceFigure(FigureId::kKappaVsLambda, params);
  REQUIRE(fig.table.rows.size() == 4);
  const auto& last = fig.table.rows.back();
  CHECK(std::stod(last[1]) == doctest::Approx(1.0));
  CHECK(std::stod(last[1]) - std::stod(last[2]) == doctest::Approx(0.43).epsilon(0.02));
  CHECK(std::stod(last[5]) == doctest::Approx(std::stod(last[1]) - std::stod(last[2])));
  double prev = -1.0;
  for (const auto& row : fig.table.rows) {
    CHECK(std::stod(row[5]) > prev);
    prev = std::stod(row[5]);
  }
}

TEST_CASE("small-budget validation produces one report per series") {
  const auto params = SmallBudget();
  CampaignCache cache;
  std::vector<ComparisonReport> all;
  for (auto id : AllFigures()) {
    auto fig = ReproduceFigure(id, params, &cache);
    for (auto& r : fig.reports) all.push_back(std::move(r));
  }
  // 3 K-tilde + 3 M + 3 N + 6 q_l + 5 kappa series.
  CHECK(all.size() == 20);
  for (const auto& r : all) {
    CAPTURE(r.scenario_id);
    CHECK(r.samples > 0);
    CHECK(r.analytical.size() == r.empirical.size());
    CHECK(r.rule == PassRule::kGapOrCi);
  }
  const auto* dyn = Find(all, "kappa_vs_lambda/dynamic");
  REQUIRE(dyn != nullptr);
  for (double e : dyn->empirical) CHECK(e == 1.0);
  CHECK(dyn->passed);

  const auto* n12 = Find(all, "pmf_n_dl/k=12");
  REQUIRE(n12 != nullptr);
  CHECK(n12->note.find("pooled over 3") != std::string::npos);
}

TEST_CASE("fault injection fails the named scenario only") {
  auto params = SmallBudget();
  params.pmf_lambdas = {1000.0};
  params.fault_injection = "q_l_dl/lambda=1000/dl";
  const auto fig = ReproduceFigure(FigureId::kQlDl, params);
  const auto* dl = Find(fig.reports, "q_l_dl/lambda=1000/dl");
  const auto* ul = Find(fig.reports, "q_l_dl/lambda=1000/ul");
  REQUIRE(dl != nullptr);
  REQUIRE(ul != nullptr);
  CHECK_FALSE(dl->passed);
  CHECK(dl->max_abs_gap > 0.04);
  CHECK(dl->note.find("fault injected") != std::string::npos);
  CHECK(ul->note.find("fault injected") == std::string::npos);
}

TEST_CASE("figure CSV layout") {
  auto params = AnalyticOnly();
  params.sweep_lambdas = {100.0};
  const auto fig = ReproduceFigure(FigureId::kKappaVsLambda, params);
  std::ostringstream out;
  fig.table.WriteCsv(out);
  const std::string csv = out.str();
  CHECK(csv.rfind("lambda,kappa_dynamic,kappa_static,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
}

TEST_CASE("invalid figure parameters are rejected") {
  auto params = AnalyticOnly();
  params.conditional_loads = {0};
  CHECK_THROWS_AS(ReproduceFigure(FigureId::kPmfNDl, params), TruError);
  params = AnalyticOnly();
  params.active_cells = 0;
  CHECK_THROWS_AS(ReproduceFigure(FigureId::kQlDl, params), TruError);
}

TEST_CASE("simultaneous band quantiles") {
  CHECK(SimultaneousZ(1, 0.99) == doctest::Approx(2.5758293035489).epsilon(1e-10));
  CHECK(SimultaneousZ(1, 0.95) == doctest::Approx(1.959963984540).epsilon(1e-10));
  CHECK(SimultaneousZ(10, 0.99) == doctest::Approx(3.2905267314919).epsilon(1e-10));
  CHECK(SimultaneousZ(0, 0.99) == SimultaneousZ(1, 0.99));
  CHECK_THROWS_AS(SimultaneousZ(3, 1.0), TruError);
}

TEST_CASE("series with too few samples fail explicitly") {
  auto params = SmallBudget();
  params.active_cells = 40;
  params.cells_per_trial = 40;
  const auto fig = ReproduceFigure(FigureId::kPmfNDl, params);
  const auto* k12 = Find(fig.reports, "pmf_n_dl/k=12");
  REQUIRE(k12 != nullptr);
  CHECK(k12->samples < params.min_samples);
  CHECK_FALSE(k12->passed);
  CHECK(k12->note.find("insufficient samples") != std::string::npos);
}

TEST_CASE("score band covers analytical points with zero empirical mass") {
  auto params = SmallBudget();
  params.pmf_lambdas = {1000.0};
  params.rule = PassRule::kGapOrCi;
  const auto fig = ReproduceFigure(FigureId::kPmfKTilde, params);
  REQUIRE(fig.reports.size() == 1);
  const auto& r = fig.reports[0];
  bool zero_point = false;
  for (std::size_t i = 0; i < r.x.size(); ++i) {
    if (r.empirical[i] == 0.0 && r.analytical[i] > 0.0) {
      zero_point = true;
      CHECK(r.ci99_halfwidth[i] > 0.0);
    }
  }
  CHECK(zero_point);
}

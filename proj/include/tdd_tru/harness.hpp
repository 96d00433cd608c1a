#pragma once

// Analytics-vs-simulation comparison and figure data regeneration.
//
// Tolerances are absolute gaps: a PMF "0.5 percentile" agreement is read as
// |empirical - analytical| <= 0.005 pointwise; TRU agreement as <= 0.003.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "tdd_tru/analytics.hpp"
#include "tdd_tru/params.hpp"
#include "tdd_tru/simulator.hpp"

namespace tdd_tru::harness {

inline constexpr int kReportSchemaVersion = 1;

enum class PassRule {
  kGapOnly,  ///< pass iff max gap <= tolerance
  kGapOrCi,  ///< also pass when every analytical point lies in the empirical 99% band
};

const char* ToString(PassRule rule);
PassRule ParsePassRule(const std::string& text);

struct ComparisonReport {
  std::string scenario_id;
  std::string figure_id;
  std::string series;
  std::vector<double> x;
  std::vector<double> analytical;
  std::vector<double> empirical;
  /// Half-widths of a simultaneous 99% band around the empirical series
  /// (score interval for proportions, Bonferroni over the points).
  std::vector<double> ci99_halfwidth;
  double max_abs_gap = 0.0;
  double tolerance = 0.0;
  PassRule rule = PassRule::kGapOnly;
  bool passed = false;
  std::int64_t samples = 0;
  double runtime_seconds = 0.0;
  std::string note;

  /// Recomputes max_abs_gap and passed from the series.
  void Evaluate();
};

nlohmann::json ToJson(const ComparisonReport& report);
ComparisonReport ReportFromJson(const nlohmann::json& j);

/// Summary document: {"schema", "schema_version", "passed", "reports": [...]}.
nlohmann::json ReportsToJson(const std::vector<ComparisonReport>& reports);
std::vector<ComparisonReport> ReportsFromJson(const nlohmann::json& j);

/// Row-major string table written as CSV.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void WriteCsv(std::ostream& out) const;
};

/// Two-sided standard-normal quantile covering `points` simultaneous
/// intervals at the given joint level (Bonferroni).
double SimultaneousZ(std::size_t points, double level);

/// Fixed output precision for every number the tools print.
std::string FormatNumber(double value);
/// `value` rounded to the printed precision.
double RoundForOutput(double value);

enum class FigureId { kPmfKTilde, kPmfMDl, kPmfNDl, kQlDl, kKappaVsLambda };

const char* ToString(FigureId id);
FigureId ParseFigureId(const std::string& text);
std::vector<FigureId> AllFigures();

struct FigureParams {
  double rho = 300.0;
  double q = 4.05;
  TrafficFrameParams traffic;
  std::vector<double> pmf_lambdas = {50.0, 200.0, 1000.0};
  std::vector<std::int64_t> conditional_loads = {1, 4, 12};
  std::vector<double> sweep_lambdas = {10.0,  20.0,   50.0,   100.0,  200.0,
                                       500.0, 1000.0, 2000.0, 5000.0, 10000.0};
  /// Active-cell samples per PMF / subframe-TRU scenario.
  double active_cells = 4e6;
  /// Active-cell samples per point of the kappa sweep.
  double sweep_active_cells = 2e5;
  /// Region sizing: expected active cells in one trial.
  double cells_per_trial = 2e5;
  std::uint64_t seed = 1;
  int workers = 0;
  TailPolicy policy;
  PassRule rule = PassRule::kGapOrCi;
  double pmf_tolerance = 0.005;
  double tru_tolerance = 0.003;
  /// Series backed by fewer samples per point fail as "insufficient samples".
  std::int64_t min_samples = 30;
  bool simulate = true;
  /// Test hook: reports whose scenario_id starts with this prefix get their
  /// analytical series shifted by +0.05.
  std::string fault_injection;

  NetworkParams Net(double lambda) const { return NetworkParams{lambda, rho, q}; }
};

/// Memoizes campaigns by their full configuration so several figures can
/// share one simulation.
class CampaignCache {
 public:
  const sim::CampaignResult& Get(const FigureParams& params, double lambda, DuplexMode mode,
                                 double active_cells);

 private:
  std::map<std::string, sim::CampaignResult> results_;
};

struct FigureResult {
  FigureId figure;
  Table table;
  std::vector<ComparisonReport> reports;
};

/// Regenerates one figure as aligned analytical / empirical series. With
/// `params.simulate == false` only analytical columns are filled and no
/// reports are produced.
FigureResult ReproduceFigure(FigureId figure, const FigureParams& params,
                             CampaignCache* cache = nullptr);

struct OracleBounds {
  std::int64_t max_load = 50;
  std::vector<int> frame_lens = {1, 2, 10, 20};
  std::vector<double> p_dls = {0.0, 0.25, 2.0 / 3.0, 1.0};
  double tolerance = 1e-12;
};

/// Brute-force oracles (explicit Binomial coefficients, exhaustive
/// nearest-integer search) checked against the subframe PMF, its CMF and the
/// load-conditioned subframe TRU for every k <= max_load.
std::vector<ComparisonReport> OracleSuite(const OracleBounds& bounds = {});

}  // namespace tdd_tru::harness

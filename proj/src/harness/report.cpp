#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/core.h>

#include "tdd_tru/error.hpp"
#include "tdd_tru/harness.hpp"

namespace tdd_tru::harness {

using nlohmann::json;

const char* ToString(PassRule rule) {
  switch (rule) {
    case PassRule::kGapOnly: return "gap";
    case PassRule::kGapOrCi: return "gap-or-ci99";
  }
  return "?";
}

PassRule ParsePassRule(const std::string& text) {
  if (text == "gap") return PassRule::kGapOnly;
  if (text == "gap-or-ci99") return PassRule::kGapOrCi;
  ThrowInvalid(fmt::format("unknown pass rule '{}' (expected gap or gap-or-ci99)", text));
}

void ComparisonReport::Evaluate() {
  if (analytical.size() != empirical.size()) {
    ThrowInvalid(fmt::format("{}: analytical/empirical length mismatch ({} vs {})", scenario_id,
                             analytical.size(), empirical.size()));
  }
  max_abs_gap = 0.0;
  bool inside_ci = ci99_halfwidth.size() == analytical.size();
  for (std::size_t i = 0; i < analytical.size(); ++i) {
    const double gap = std::abs(analytical[i] - empirical[i]);
    max_abs_gap = std::max(max_abs_gap, gap);
    if (inside_ci && gap > ci99_halfwidth[i]) inside_ci = false;
  }
  passed = max_abs_gap <= tolerance || (rule == PassRule::kGapOrCi && inside_ci);
}

double SimultaneousZ(std::size_t points, double level) {
  if (!(level > 0.0 && level < 1.0)) ThrowInvalid("confidence level must be in (0, 1)");
  const double tail = (1.0 - level) / (2.0 * static_cast<double>(std::max<std::size_t>(points, 1)));
  // Upper standard-normal quantile by bisection on the survival function.
  double lo = 0.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (0.5 * std::erfc(mid / std::sqrt(2.0)) > tail ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::string FormatNumber(double value) {
  if (value == 0.0) return "0";  // also folds -0
  return fmt::format("{:.12g}", value);
}

double RoundForOutput(double value) {
  return std::stod(FormatNumber(value));
}

namespace {

json Rounded(const std::vector<double>& values) {
  json out = json::array();
  for (double v : values) out.push_back(RoundForOutput(v));
  return out;
}

}  // namespace

json ToJson(const ComparisonReport& r) {
  return json{{"scenario_id", r.scenario_id},
              {"figure_id", r.figure_id},
              {"series", r.series},
              {"x", Rounded(r.x)},
              {"analytical", Rounded(r.analytical)},
              {"empirical", Rounded(r.empirical)},
              {"ci99_halfwidth", Rounded(r.ci99_halfwidth)},
              {"max_abs_gap", RoundForOutput(r.max_abs_gap)},
              {"tolerance", r.tolerance},
              {"rule", ToString(r.rule)},
              {"passed", r.passed},
              {"samples", r.samples},
              {"runtime_seconds", RoundForOutput(r.runtime_seconds)},
              {"note", r.note}};
}

ComparisonReport ReportFromJson(const json& j) {
  ComparisonReport r;
  r.scenario_id = j.at("scenario_id").get<std::string>();
  r.figure_id = j.at("figure_id").get<std::string>();
  r.series = j.at("series").get<std::string>();
  r.x = j.at("x").get<std::vector<double>>();
  r.analytical = j.at("analytical").get<std::vector<double>>();
  r.empirical = j.at("empirical").get<std::vector<double>>();
  r.ci99_halfwidth = j.at("ci99_halfwidth").get<std::vector<double>>();
  r.max_abs_gap = j.at("max_abs_gap").get<double>();
  r.tolerance = j.at("tolerance").get<double>();
  r.rule = ParsePassRule(j.at("rule").get<std::string>());
  r.passed = j.at("passed").get<bool>();
  r.samples = j.at("samples").get<std::int64_t>();
  r.runtime_seconds = j.at("runtime_seconds").get<double>();
  r.note = j.value("note", "");
  return r;
}

json ReportsToJson(const std::vector<ComparisonReport>& reports) {
  json list = json::array();
  bool all = true;
  for (const auto& r : reports) {
    list.push_back(ToJson(r));
    all = all && r.passed;
  }
  return json{{"schema", "tdd-tru/validation-report"},
              {"schema_version", kReportSchemaVersion},
              {"passed", all},
              {"reports", std::move(list)}};
}

std::vector<ComparisonReport> ReportsFromJson(const json& j) {
  const int version = j.at("schema_version").get<int>();
  if (version != kReportSchemaVersion) {
    ThrowInvalid(fmt::format("unsupported report schema_version {}", version));
  }
  std::vector<ComparisonReport> out;
  for (const auto& item : j.at("reports")) out.push_back(ReportFromJson(item));
  return out;
}

void Table::WriteCsv(std::ostream& out) const {
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
}

}  // namespace tdd_tru::harness

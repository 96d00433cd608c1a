#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/chrono.h>
#include <fmt/core.h>

#include "internal.hpp"
#include "tdd_tru/analytics.hpp"
#include "tdd_tru/cli.hpp"
#include "tdd_tru/error.hpp"

#ifndef TDD_TRU_VERSION
#define TDD_TRU_VERSION "0.0.0"
#endif

namespace tdd_tru::cli {

using harness::FormatNumber;

const char* ToolVersion() { return TDD_TRU_VERSION; }

namespace {

double ParseNumber(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) ThrowInvalid(fmt::format("not a number: '{}'", text));
  return v;
}

std::vector<std::string> Split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) parts.push_back(item);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

}  // namespace

std::vector<double> ParseGrid(const std::string& spec) {
  if (spec.empty()) ThrowInvalid("empty grid");
  if (spec.find(':') == std::string::npos) {
    std::vector<double> out;
    for (const auto& item : Split(spec, ',')) out.push_back(ParseNumber(item));
    return out;
  }
  const auto parts = Split(spec, ':');
  if (parts.size() != 3 && parts.size() != 4) {
    ThrowInvalid(fmt::format("grid '{}' must be start:stop:count[:log]", spec));
  }
  const double start = ParseNumber(parts[0]);
  const double stop = ParseNumber(parts[1]);
  const double count_d = ParseNumber(parts[2]);
  const bool log = parts.size() == 4;
  if (log && parts[3] != "log") ThrowInvalid(fmt::format("grid '{}': unknown scale '{}'", spec, parts[3]));
  if (count_d < 1 || count_d != std::floor(count_d)) {
    ThrowInvalid(fmt::format("grid '{}': count must be a positive integer", spec));
  }
  if (log && (start <= 0 || stop <= 0)) ThrowInvalid(fmt::format("grid '{}': log scale needs positive endpoints", spec));
  const auto count = static_cast<int>(count_d);
  std::vector<double> out;
  for (int i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    double v = log ? std::exp(std::log(start) + t * (std::log(stop) - std::log(start)))
                   : start + t * (stop - start);
    if (i == count - 1 && count > 1) v = stop;
    // Snap log points onto the printed precision so that 10^k grids are exact.
    out.push_back(log ? harness::RoundForOutput(v) : v);
  }
  if (count >= 1) out.front() = start;
  return out;
}

std::vector<std::string> SummaryColumns() {
  return {"lambda",          "rho",          "q",
          "p_dl",            "frame_len",    "n0_dl",
          "active_bs_density", "kappa_dynamic", "kappa_static",
          "kappa_static_dl", "kappa_static_ul", "kappa_add",
          "kappa_add_dl",    "kappa_add_ul", "kappa_add_limit",
          "gain_ratio",      "error_bound"};
}

std::vector<std::string> SummaryRow(const NetworkParams& net, const TrafficFrameParams& traffic,
                                    const TailPolicy& policy) {
  net.Validate();
  traffic.Validate();
  const Pmf load = analytics::UePerActiveBsPmf(net, policy);
  const auto dyn = analytics::AverageTruDynamic(load, traffic);
  const auto stat = analytics::AverageTruStatic(load, traffic);
  const auto add = analytics::AdditionalTru(load, traffic);
  const auto limit = analytics::AdditionalTruLimit(traffic);
  const double bound = std::max({dyn.error_bound, stat.error_bound, add.error_bound});
  return {FormatNumber(net.lambda),
          FormatNumber(net.rho),
          FormatNumber(net.q),
          FormatNumber(traffic.p_dl),
          std::to_string(traffic.frame_len),
          std::to_string(traffic.static_dl_subframes),
          FormatNumber(analytics::ActiveBsDensity(net)),
          FormatNumber(dyn.kappa),
          FormatNumber(stat.kappa),
          FormatNumber(stat.kappa_dl),
          FormatNumber(stat.kappa_ul),
          FormatNumber(add.total),
          FormatNumber(add.dl),
          FormatNumber(add.ul),
          FormatNumber(limit.total),
          stat.kappa > 0.0 ? FormatNumber(add.total / stat.kappa) : std::string{},
          FormatNumber(bound)};
}

namespace detail {

std::string JsonText(const nlohmann::json& j) { return j.dump(2) + "\n"; }

std::string VersionedCsv(const std::string& kind, const harness::Table& table) {
  std::ostringstream out;
  out << "# tdd-tru " << kind << " schema " << kCsvSchemaVersion << '\n';
  table.WriteCsv(out);
  return out.str();
}

void WriteTextFile(const std::string& out_dir, const std::string& name, const std::string& content) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw TruError(ErrorCode::kIo,
                   fmt::format("cannot create directory '{}': {}", out_dir, ec.message()));
  }
  const auto path = std::filesystem::path(out_dir) / name;
  std::ofstream file(path, std::ios::binary);
  file << content;
  if (!file) throw TruError(ErrorCode::kIo, fmt::format("cannot write '{}'", path.string()));
}

namespace {

std::string ReproduceCommand(const std::string& command, const nlohmann::json& parameters) {
  std::string line = "tdd_tru " + command;
  for (const auto& [key, value] : parameters.items()) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    if (value.is_boolean()) {
      if (value.get<bool>()) line += " " + flag;
      continue;
    }
    std::string text;
    if (value.is_string()) {
      text = value.get<std::string>();
      if (text.empty()) continue;
    } else if (value.is_array()) {
      if (value.empty()) continue;
      for (const auto& item : value) text += (text.empty() ? "" : ",") + item.get<std::string>();
    } else {
      text = value.dump();
    }
    line += " " + flag + " '" + text + "'";
  }
  return line;
}

}  // namespace

void WriteManifest(const std::string& command, const std::string& out_dir,
                   const CommandOutcome& outcome) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  nlohmann::json manifest = {
      {"schema", "tdd-tru/run-manifest"},
      {"schema_version", kManifestSchemaVersion},
      {"command", command},
      {"tool_version", ToolVersion()},
      {"timestamp", fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(now))},
      {"parameters", outcome.parameters},
      {"seed", outcome.parameters.contains("seed") ? outcome.parameters["seed"] : nlohmann::json()},
      {"outputs", outcome.outputs},
      {"exit_code", outcome.exit_code},
      {"reproduce", ReproduceCommand(command, outcome.parameters)},
  };
  WriteTextFile(out_dir, "manifest.json", JsonText(manifest));
}

}  // namespace detail
}  // namespace tdd_tru::cli

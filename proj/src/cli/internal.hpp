#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "tdd_tru/harness.hpp"
#include "tdd_tru/params.hpp"

namespace tdd_tru::cli::detail {

struct ModelOptions {
  double rho = 300.0;
  double q = 4.05;
  double p_dl = 2.0 / 3.0;
  int frame_len = 10;
  int n0_dl = 7;

  TrafficFrameParams Traffic() const { return {p_dl, frame_len, n0_dl}; }
};

struct AnalyzeOptions {
  double lambda = 0.0;
  ModelOptions model;
  double tail_epsilon = 1e-12;
  std::string out_dir = "results";
};

struct SimulateOptions {
  double lambda = 0.0;
  ModelOptions model;
  double region_side = 0.0;  // 0 = sized for about 1e4 active cells per trial
  std::int64_t trials = 10;
  std::uint64_t seed = 1;
  int workers = 0;
  std::string mode = "dynamic";
  bool records = false;
  std::string out_dir = "results";
};

struct ValidateOptions {
  ModelOptions model;
  double budget = 4e6;
  double sweep_budget = 2e5;
  double cells_per_trial = 2e5;
  std::uint64_t seed = 1;
  int workers = 0;
  std::string rule = "gap-or-ci99";
  std::vector<std::string> figures;
  bool skip_oracle = false;
  std::string inject_fault;
  std::string out_dir = "results";
};

struct SweepOptions {
  std::string lambda;
  std::string rho = "300";
  std::string q = "4.05";
  std::string p_dl;  // empty = 2/3
  std::string frame_len = "10";
  std::string n0_dl = "7";
  double tail_epsilon = 1e-12;
  std::string out_dir = "results";
};

/// Result of one command: the files it wrote, relative to out_dir, and the
/// resolved flat parameter set recorded in the manifest.
struct CommandOutcome {
  int exit_code = 0;
  nlohmann::json parameters = nlohmann::json::object();
  std::vector<std::string> outputs;
};

CommandOutcome Analyze(const AnalyzeOptions& o, std::ostream& out);
CommandOutcome Simulate(const SimulateOptions& o, std::ostream& out);
CommandOutcome Validate(const ValidateOptions& o, std::ostream& out);
CommandOutcome Sweep(const SweepOptions& o, std::ostream& out);

/// Writes manifest.json into out_dir.
void WriteManifest(const std::string& command, const std::string& out_dir,
                   const CommandOutcome& outcome);

/// Writes `content` to out_dir/name, creating out_dir; throws kIo.
void WriteTextFile(const std::string& out_dir, const std::string& name, const std::string& content);

/// "# tdd-tru <kind> schema <n>" followed by the table.
std::string VersionedCsv(const std::string& kind, const harness::Table& table);

std::string JsonText(const nlohmann::json& j);

}  // namespace tdd_tru::cli::detail

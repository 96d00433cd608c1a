#pragma once

// Command-line front end: analyze / simulate / validate / sweep.

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "tdd_tru/params.hpp"

namespace tdd_tru::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitInvalidInput = 1,
  kExitValidationFailed = 2,
  kExitNotConverged = 3,
};

inline constexpr int kManifestSchemaVersion = 1;
inline constexpr int kCsvSchemaVersion = 1;
inline constexpr const char* kSeedEnvVar = "TDD_TRU_SEED";

const char* ToolVersion();

/// Parses a grid: "a,b,c" lists values, "start:stop:count" is a linear grid
/// and "start:stop:count:log" a logarithmic one (endpoints included).
std::vector<double> ParseGrid(const std::string& spec);

/// Long-form analytical summary shared by `analyze` (summary.csv) and
/// `sweep` (sweep.csv).
std::vector<std::string> SummaryColumns();
std::vector<std::string> SummaryRow(const NetworkParams& net, const TrafficFrameParams& traffic,
                                    const TailPolicy& policy);

/// Entry point. `args` excludes the program name. `env_seed` is the value of
/// TDD_TRU_SEED, or nullptr when unset.
int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const char* env_seed);

}  // namespace tdd_tru::cli

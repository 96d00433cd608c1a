#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>

#include <fmt/core.h>

#include "CLI11.hpp"
#include "internal.hpp"
#include "tdd_tru/cli.hpp"
#include "tdd_tru/error.hpp"

namespace tdd_tru::cli {

using namespace detail;
using nlohmann::json;

namespace {

void AddModel(CLI::App* cmd, ModelOptions& m) {
  cmd->add_option("--rho", m.rho, "Active-UE density per km^2")->capture_default_str();
  cmd->add_option("--q", m.q, "Gamma shape of the cell-area distribution")->capture_default_str();
  cmd->add_option("--p-dl", m.p_dl, "Per-UE DL request probability")->default_str("2/3");
  cmd->add_option("--frame-len", m.frame_len, "Subframes per frame")->capture_default_str();
  cmd->add_option("--n0-dl", m.n0_dl, "Static-TDD DL subframes")->capture_default_str();
}

std::uint64_t ParseSeed(const std::string& text, const char* origin) {
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    if (!text.empty() && text.front() != '-') v = std::stoull(text, &used, 10);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    ThrowInvalid(fmt::format("{}: seed must be an unsigned 64-bit integer (got '{}')", origin, text));
  }
  return v;
}

json LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) ThrowInvalid(fmt::format("cannot read config file '{}'", path));
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    ThrowInvalid(fmt::format("config '{}': {}", path, e.what()));
  }
  if (!doc.is_object()) ThrowInvalid(fmt::format("config '{}' must be a flat JSON object", path));
  return doc;
}

// Command-line arguments equivalent to the config entries whose options
// were not given explicitly.
std::vector<std::string> ConfigArguments(const json& doc, CLI::App* cmd, const std::string& path) {
  std::vector<std::string> args;
  for (const auto& [key, value] : doc.items()) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    if (flag == "--config") ThrowInvalid("config files cannot include other config files");
    CLI::Option* opt = cmd->get_option_no_throw(flag);
    if (opt == nullptr) {
      ThrowInvalid(fmt::format("config '{}': unknown key '{}' for '{}'", path, key, cmd->get_name()));
    }
    if (opt->count() > 0) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back(flag);
    } else if (value.is_string()) {
      args.push_back(flag);
      args.push_back(value.get<std::string>());
    } else if (value.is_number()) {
      args.push_back(flag);
      args.push_back(value.dump());
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& item : value) {
        if (!item.is_string() && !item.is_number()) {
          ThrowInvalid(fmt::format("config key '{}': array items must be scalars", key));
        }
        joined += (joined.empty() ? "" : ",") + (item.is_string() ? item.get<std::string>() : item.dump());
      }
      args.push_back(flag);
      args.push_back(joined);
    } else {
      ThrowInvalid(fmt::format("config key '{}' has an unsupported type", key));
    }
  }
  return args;
}

void Parse(CLI::App& app, std::vector<std::string> args) {
  std::reverse(args.begin(), args.end());
  app.parse(args);
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const char* env_seed) {
  CLI::App app{"Time-resource utilization of dynamic and static TDD in Poisson small-cell networks",
               "tdd_tru"};
  app.set_version_flag("--version", ToolVersion());
  app.require_subcommand(1);

  AnalyzeOptions analyze;
  SimulateOptions simulate;
  ValidateOptions validate;
  SweepOptions sweep;
  std::string seed_text;
  std::string config_path;

  auto* a = app.add_subcommand("analyze", "Closed-form TRU profile, averages and dynamic-TDD gain");
  a->add_option("--lambda", analyze.lambda, "BS density per km^2");
  AddModel(a, analyze.model);
  a->add_option("--tail-epsilon", analyze.tail_epsilon, "Truncation bound on the UE-count tail")
      ->capture_default_str();

  auto* s = app.add_subcommand("simulate", "Monte Carlo campaign on a PPP deployment");
  s->add_option("--lambda", simulate.lambda, "BS density per km^2");
  AddModel(s, simulate.model);
  s->add_option("--region-side", simulate.region_side,
                "Square side in km (default: about 1e4 active cells per trial)");
  s->add_option("--trials", simulate.trials, "Independent deployments")->capture_default_str();
  s->add_option("--mode", simulate.mode, "dynamic or static")
      ->check(CLI::IsMember({"dynamic", "static"}))
      ->capture_default_str();
  s->add_flag("--records", simulate.records, "Also write per-cell records.csv");

  auto* v = app.add_subcommand("validate", "Compare analytics with simulation over the figure grids");
  AddModel(v, validate.model);
  v->add_option("--budget", validate.budget, "Active-cell samples per PMF / TRU scenario")
      ->capture_default_str();
  v->add_option("--sweep-budget", validate.sweep_budget, "Active-cell samples per kappa sweep point")
      ->capture_default_str();
  v->add_option("--cells-per-trial", validate.cells_per_trial, "Expected active cells per deployment")
      ->capture_default_str();
  v->add_option("--rule", validate.rule, "Pass rule: gap or gap-or-ci99")
      ->check(CLI::IsMember({"gap", "gap-or-ci99"}))
      ->capture_default_str();
  v->add_option("--figures", validate.figures,
                "Subset of pmf_k_tilde,pmf_m_dl,pmf_n_dl,q_l_dl,kappa_vs_lambda")
      ->delimiter(',');
  v->add_flag("--skip-oracle", validate.skip_oracle, "Skip the brute-force oracle checks");
  v->add_option("--inject-fault", validate.inject_fault,
                "Test hook: shift analytical values of scenarios with this id prefix")
      ->group("");

  auto* w = app.add_subcommand("sweep", "Analytical summary over a parameter grid (long-form CSV)");
  const char* grid_help = " (a,b,c or start:stop:count[:log])";
  w->add_option("--lambda", sweep.lambda, std::string("BS density grid") + grid_help);
  w->add_option("--rho", sweep.rho, std::string("UE density grid") + grid_help)->capture_default_str();
  w->add_option("--q", sweep.q, std::string("Gamma shape grid") + grid_help)->capture_default_str();
  w->add_option("--p-dl", sweep.p_dl, std::string("DL probability grid") + grid_help)->default_str("2/3");
  w->add_option("--frame-len", sweep.frame_len, std::string("Frame length grid") + grid_help)
      ->capture_default_str();
  w->add_option("--n0-dl", sweep.n0_dl, std::string("Static DL subframe grid") + grid_help)
      ->capture_default_str();
  w->add_option("--tail-epsilon", sweep.tail_epsilon, "Truncation bound on the UE-count tail")
      ->capture_default_str();

  for (auto* cmd : {a, s, v, w}) {
    cmd->add_option("--config", config_path, "Flat JSON file of option values; flags take precedence");
    cmd->add_option("--out-dir", *(cmd == a   ? &analyze.out_dir
                                   : cmd == s ? &simulate.out_dir
                                   : cmd == v ? &validate.out_dir
                                              : &sweep.out_dir),
                    "Output directory")
        ->capture_default_str();
  }
  for (auto* cmd : {s, v}) {
    cmd->add_option("--seed", seed_text, fmt::format("Master seed (fallback: ${}, then 1)", kSeedEnvVar));
    cmd->add_option("--workers", cmd == s ? simulate.workers : validate.workers,
                    "Worker threads (0 = all cores)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
  }

  try {
    try {
      Parse(app, args);
      if (!config_path.empty()) {
        CLI::App* cmd = app.get_subcommands().front();
        auto extra = ConfigArguments(LoadConfig(config_path), cmd, config_path);
        if (!extra.empty()) {
          std::vector<std::string> merged = args;
          const auto pos = std::find(merged.begin(), merged.end(), cmd->get_name());
          merged.insert(pos + 1, extra.begin(), extra.end());
          app.clear();
          Parse(app, merged);
        }
      }
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? kExitOk : kExitInvalidInput;
    }

    CLI::App* cmd = app.get_subcommands().front();
    const std::string name = cmd->get_name();
    if ((cmd == a || cmd == s || cmd == w) && cmd->get_option("--lambda")->count() == 0) {
      ThrowInvalid("--lambda is required");
    }
    std::uint64_t seed = 1;
    if (!seed_text.empty()) {
      seed = ParseSeed(seed_text, "--seed");
    } else if (env_seed != nullptr && *env_seed != '\0') {
      seed = ParseSeed(env_seed, kSeedEnvVar);
    }
    simulate.seed = seed;
    validate.seed = seed;

    CommandOutcome outcome;
    std::string out_dir;
    if (cmd == a) {
      outcome = Analyze(analyze, out);
      out_dir = analyze.out_dir;
    } else if (cmd == s) {
      outcome = Simulate(simulate, out);
      out_dir = simulate.out_dir;
    } else if (cmd == v) {
      outcome = Validate(validate, out);
      out_dir = validate.out_dir;
    } else {
      outcome = Sweep(sweep, out);
      out_dir = sweep.out_dir;
    }
    outcome.outputs.push_back("manifest.json");
    WriteManifest(name, out_dir, outcome);
    return outcome.exit_code;
  } catch (const TruError& e) {
    err << "error (" << ToString(e.code()) << "): " << e.what() << '\n';
    return e.code() == ErrorCode::kTailNotConverged ? kExitNotConverged : kExitInvalidInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalidInput;
  }
}

}  // namespace tdd_tru::cli

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fraclog/problem.hpp"

namespace fraclog {

/// Every setting a run can take. Keys in the flat config format are listed
/// by config_keys(); emit_config/parse_config_text round-trip exactly.
struct RunConfig {
  // problem
  int dim = 1;
  double s = 0.3;
  double p = 2.0;
  double q = 1.5;
  double r = 3.0;
  // domain: [a, b] (x) and [c, d] (y, dim 2 only)
  double domain_a = 0.0;
  double domain_b = 1.0;
  double domain_c = 0.0;
  double domain_d = 1.0;
  int grid_n = 64;
  // solver
  double solver_tol = 1e-8;
  int solver_max_iters = 50000;
  double solver_armijo_c = 1e-4;
  double solver_shrink = 0.5;
  double collapse_tol = 1e-6;
  std::string solve_initial = "auto";  // auto | random | eigen | root | zero
  double solve_tau = 1.0;              // eigen start amplitude
  std::uint64_t seed = 1;
  // eigen
  int eigen_restarts = 5;
  double eigen_tol = 0.0;  // 0: 1e-8 for p = 2, 1e-6 otherwise
  // subcommands
  double lambda = 1.0;
  double sweep_from = 0.5;
  double sweep_to = 2.0;
  int sweep_steps = 8;
  double bracket_tol = 1e-3;
  double lambda_high = 0.0;
  double step_factor = 0.8;
  int mp_nodes = 32;
  double mp_string_tol = 1e-4;
  double distinct_tol = 1e-4;
  std::string verify_regime = "all";  // sub | equi | super | all
  double hopf_frac = 0.1;
  int verify_trials = 10;
  std::vector<int> refine_ns{32, 64, 128};
  // runtime
  int threads = 1;
  std::string cache_dir;

  bool operator==(const RunConfig&) const = default;

  ProblemParams problem() const;
  DomainSpec domain() const;
};

struct ConfigKey {
  std::string name;
  std::string type;  // int | real | string | int-list
  std::string help;
  std::function<void(RunConfig&, const std::string&)> set;  // throws std::invalid_argument on bad text
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<ConfigKey>& config_keys();

/// Keys that must be provided by the file, the environment or a flag.
const std::vector<std::string>& required_config_keys();

/// Environment variable consulted for a key: FRACLOG_ + upper-case key with
/// '.' replaced by '_' (grid.n -> FRACLOG_GRID_N).
std::string env_var_name(const std::string& key);

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
EnvLookup process_env();

/// Applies a single key=value assignment; origin names the source for errors.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value, const std::string& origin);

/// Parses flat key=value text ('#' starts a comment). Errors name the key and line.
/// Records every key that was set in *seen when given.
RunConfig parse_config_text(const std::string& text, const std::string& origin, RunConfig base = {},
                            std::vector<std::string>* seen = nullptr);

using Settings = std::vector<std::pair<std::string, std::string>>;

/// defaults < file (optional) < environment < flags; then checks required
/// keys and validates the result.
RunConfig parse_config(const std::optional<std::filesystem::path>& file, const Settings& flags,
                       const EnvLookup& env = process_env(), const Settings& defaults = {});

/// Throws ValidationError unless the configuration describes a valid run.
void validate_config(const RunConfig& cfg);

/// Every key, one "key = value" line each, values printed losslessly.
std::string emit_config(const RunConfig& cfg);

}  // namespace fraclog

// fraclog: solver and verification harness for the fractional p-Laplacian
// logistic problem. Run `fraclog --help` for the key list.
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "fraclog/app.hpp"

namespace {

// Short spellings for frequently used keys.
const std::map<std::string, std::string> kAliases = {
    {"n", "grid.n"},           {"from", "sweep.from"},          {"to", "sweep.to"},
    {"steps", "sweep.steps"},  {"regime", "verify.regime"},     {"bracket-tol", "bracket_tol"},
    {"hopf-frac", "hopf_frac"}, {"collapse-tol", "collapse_tol"}, {"distinct-tol", "distinct_tol"},
};

std::string key_help() {
  std::string out = "Configuration keys (file line `key = value`, env var, or --key VALUE):\n";
  for (const auto& k : fraclog::config_keys()) {
    out += "  " + k.name + " (" + k.type + ", " + fraclog::env_var_name(k.name) + "): " + k.help + "\n";
  }
  out += "Required: s, p, q, r (verify supplies p = 2, s = 0.3 and its own q, r).\n";
  out += "Precedence: file < environment < flags.\n";
  out += "Exit codes: 0 ok, 1 validation error, 2 non-convergence, 3 verification failure.\n";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fractional p-Laplacian logistic solver and verification harness"};
  app.footer(key_help());
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_file;
  std::string out_dir = "out";
  std::vector<std::string> sets;
  app.add_option("--config", config_file, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--set", sets, "extra key=value overrides (repeatable)");

  std::map<std::string, std::string> flag_values;
  for (const auto& k : fraclog::config_keys()) {
    app.add_option("--" + k.name, flag_values[k.name], k.help)->group("Configuration keys");
  }
  for (const auto& [alias, key] : kAliases) {
    app.add_option("--" + alias, flag_values[key], "same as --" + key)->group("Aliases");
  }

  const std::map<std::string, std::string> descriptions = {
      {"eigen", "principal eigenpair of the discrete operator"},
      {"torsion", "solve the torsion problem L v = 1"},
      {"solve", "positive solution at --lambda"},
      {"sweep", "continuation over lambda from --from to --to in --steps points"},
      {"threshold", "bracket the solvability threshold (q > p)"},
      {"mountain-pass", "second solution below u_lambda at --lambda (q > p)"},
      {"verify", "run property checks; --regime sub|equi|super|all"},
      {"refine", "grid refinement table over refine.ns"},
  };
  for (const auto& name : fraclog::command_names()) app.add_subcommand(name, descriptions.at(name));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : fraclog::kExitValidation;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  fraclog::Settings flags;
  for (const auto& k : fraclog::config_keys()) {
    const bool given = app.count("--" + k.name) > 0;
    bool alias_given = false;
    for (const auto& [alias, key] : kAliases) alias_given = alias_given || (key == k.name && app.count("--" + alias));
    if (given || alias_given) flags.emplace_back(k.name, flag_values[k.name]);
  }
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::cerr << "error: --set expects key=value, got '" << kv << "'\n";
      return fraclog::kExitValidation;
    }
    flags.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
  }

  fraclog::Settings defaults;
  if (command == "verify") defaults = {{"s", "0.3"}, {"p", "2"}, {"q", "1.5"}, {"r", "3"}};

  fraclog::RunConfig cfg;
  try {
    std::optional<std::filesystem::path> file;
    if (!config_file.empty()) file = config_file;
    cfg = fraclog::parse_config(file, flags, fraclog::process_env(), defaults);
  } catch (const fraclog::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return fraclog::kExitValidation;
  }
  return fraclog::run_command(command, cfg, out_dir, std::cerr);
}

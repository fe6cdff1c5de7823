#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "fraclog/config.hpp"
#include "fraclog/report.hpp"
#include "fraclog/verification.hpp"

namespace fraclog {

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitNoConvergence = 2, kExitVerification = 3 };

const std::vector<std::string>& command_names();

/// Exponents used by verify for each regime: sub q = (1+p)/2, r = p+1;
/// equi q = p, r = p+1; super q = p+1, r = p+2 (p = 2: 1.5/3, 2/3, 3/4).
RunConfig regime_preset(const RunConfig& cfg, Regime regime);

/// Runs one check suite ("sub", "equi", "super" or "torsion") on cfg.
std::vector<CheckResult> verify_suite(const std::string& suite, const RunConfig& cfg);

struct CommandOutcome {
  int exit_code = kExitOk;
  Report report;
};

/// Computes a subcommand without touching the file system. Validation and
/// solver errors propagate as exceptions.
CommandOutcome execute(const std::string& command, const RunConfig& cfg);

/// execute + write_report, mapping exceptions to exit codes; one-line
/// progress and errors go to log.
int run_command(const std::string& command, const RunConfig& cfg, const std::filesystem::path& out_dir,
                std::ostream& log);

}  // namespace fraclog

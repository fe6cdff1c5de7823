#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "fraclog/app.hpp"

using namespace fraclog;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fraclog_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

EnvLookup no_env() {
  return [](const std::string&) { return std::optional<std::string>(); };
}

EnvLookup env_of(std::map<std::string, std::string> vars) {
  return [vars = std::move(vars)](const std::string& name) -> std::optional<std::string> {
    const auto it = vars.find(name);
    if (it == vars.end()) return std::nullopt;
    return it->second;
  };
}

const Settings kRequired = {{"s", "0.3"}, {"p", "2"}, {"q", "1.5"}, {"r", "3"}};

Settings with(Settings base, const Settings& extra) {
  base.insert(base.end(), extra.begin(), extra.end());
  return base;
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(FRACLOG_CLI) + " " + args + " >" + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("file < env < flag precedence") {
  const fs::path dir = scratch("precedence");
  std::ofstream(dir / "run.cfg") << "# demo\ns = 0.4\np = 2\nq = 1.5  # trailing comment\nr = 3\ngrid.n = 20\n";
  CHECK(parse_config(dir / "run.cfg", {}, no_env()).s == 0.4);
  CHECK(parse_config(dir / "run.cfg", {{"s", "0.3"}}, no_env()).s == 0.3);
  CHECK(parse_config(dir / "run.cfg", {}, env_of({{"FRACLOG_S", "0.25"}})).s == 0.25);
  CHECK(parse_config(dir / "run.cfg", {{"s", "0.3"}}, env_of({{"FRACLOG_S", "0.25"}})).s == 0.3);
  CHECK(parse_config(dir / "run.cfg", {}, env_of({{"FRACLOG_GRID_N", "40"}})).grid_n == 40);
  CHECK(parse_config(std::nullopt, kRequired, no_env(), {{"grid.n", "8"}}).grid_n == 8);
  CHECK(parse_config(dir / "run.cfg", {}, no_env(), {{"grid.n", "8"}}).grid_n == 20);
  CHECK(env_var_name("solver.max_iters") == "FRACLOG_SOLVER_MAX_ITERS");
}

TEST_CASE("configuration errors name the key and where it came from") {
  const std::string missing = error_of([] { parse_config(std::nullopt, {{"s", "0.3"}, {"q", "1.5"}, {"r", "3"}}, no_env()); });
  CHECK(missing.find("'p'") != std::string::npos);
  CHECK(missing.find("FRACLOG_P") != std::string::npos);

  const std::string unknown = error_of([] { parse_config_text("s = 0.3\nbogus = 1\n", "run.cfg"); });
  CHECK(unknown.find("bogus") != std::string::npos);
  CHECK(unknown.find("line 2") != std::string::npos);

  const std::string type = error_of([] { parse_config_text("\ngrid.n = many\n", "run.cfg"); });
  CHECK(type.find("grid.n") != std::string::npos);
  CHECK(type.find("line 2") != std::string::npos);

  const std::string range = error_of([] { parse_config(std::nullopt, with(kRequired, {{"r", "9"}}), no_env()); });
  CHECK(range.find("'r'") != std::string::npos);
  CHECK(range.find("flag --r") != std::string::npos);

  const fs::path dir = scratch("errors");
  std::ofstream(dir / "bad.cfg") << "s = 0.3\np = 2\nq = 1.5\nr = 3\ns = 1.5\n";
  const std::string from_file = error_of([&] { parse_config(dir / "bad.cfg", {}, no_env()); });
  CHECK(from_file.find("'s'") != std::string::npos);
  CHECK(from_file.find("line 5") != std::string::npos);

  CHECK(!error_of([] { parse_config_text("s 0.3\n", "x"); }).empty());
  CHECK(!error_of([] { parse_config(std::nullopt, with(kRequired, {{"refine.ns", "64,32"}}), no_env()); }).empty());
  CHECK(!error_of([] { parse_config(std::nullopt, with(kRequired, {{"dim", "2"}, {"r", "2.5"}, {"q", "2"}, {"s", "0.6"}}), no_env()); }).empty());
}

TEST_CASE("emit_config round-trips exactly") {
  RunConfig cfg = parse_config(std::nullopt, with(kRequired, {{"s", "0.2"}, {"lambda", "0.30000000000000004"}}), no_env());
  cfg.solver_tol = 1.0 / 3.0;
  cfg.refine_ns = {8, 16, 1024};
  cfg.cache_dir = "some dir";
  cfg.seed = 18446744073709551615ull;
  const RunConfig back = parse_config_text(emit_config(cfg), "emitted");
  CHECK(back == cfg);
  CHECK(emit_config(back) == emit_config(cfg));
  for (const auto& key : config_keys()) CHECK(emit_config(cfg).find(key.name + " = ") != std::string::npos);
}

TEST_CASE("report and csv outputs") {
  RunConfig cfg = parse_config(std::nullopt, with(kRequired, {{"grid.n", "24"}}), no_env());
  const fs::path dir = scratch("solve");
  std::ostringstream log;
  CHECK(run_command("solve", cfg, dir, log) == kExitOk);
  REQUIRE(fs::exists(dir / "report.json"));
  REQUIRE(fs::exists(dir / "solution.csv"));
  const auto json = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(json["schema_version"] == kReportSchemaVersion);
  CHECK(json["command"] == "solve");
  CHECK(json["code_version"] == code_version());
  CHECK(json.contains("generated_at"));
  CHECK(json["config"]["grid.n"] == "24");

  std::istringstream csv(slurp(dir / "solution.csv"));
  std::string line;
  int comments = 0, rows = 0;
  while (std::getline(csv, line)) {
    if (line.rfind("#", 0) == 0) ++comments;
    else ++rows;
  }
  CHECK(comments == 2);
  CHECK(rows == 25);  // header + one row per cell

  cfg.sweep_steps = 5;
  const fs::path sweep = scratch("sweep");
  CHECK(run_command("sweep", cfg, sweep, log) == kExitOk);
  std::istringstream branch(slurp(sweep / "branch.csv"));
  rows = 0;
  while (std::getline(branch, line)) rows += line.rfind("#", 0) != 0;
  CHECK(rows == 6);
}

TEST_CASE("csv outputs are byte-identical across runs") {
  const RunConfig cfg = parse_config(std::nullopt, with(kRequired, {{"grid.n", "24"}, {"q", "3"}, {"r", "4"}}), no_env());
  const fs::path a = scratch("rerun_a"), b = scratch("rerun_b");
  std::ostringstream log;
  REQUIRE(run_command("threshold", cfg, a, log) == kExitOk);
  REQUIRE(run_command("threshold", cfg, b, log) == kExitOk);
  int compared = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    if (entry.path().extension() != ".csv") continue;
    CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
    ++compared;
  }
  CHECK(compared >= 2);
  CHECK(report_json(execute("threshold", cfg).report) == report_json(execute("threshold", cfg).report));
}

TEST_CASE("csv_number is lossless") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 5e-324}) CHECK(std::strtod(csv_number(v).c_str(), nullptr) == v);
  CHECK(csv_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(csv_number(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("exit codes") {
  std::ostringstream log;
  RunConfig cfg = parse_config(std::nullopt, with(kRequired, {{"grid.n", "16"}}), no_env());
  CHECK(run_command("eigen", cfg, scratch("exit_ok"), log) == kExitOk);

  RunConfig bad = cfg;
  bad.r = 9;
  CHECK(run_command("solve", bad, scratch("exit_bad"), log) == kExitValidation);
  CHECK(run_command("no-such-command", cfg, scratch("exit_cmd"), log) == kExitValidation);

  RunConfig starved = cfg;
  starved.solver_max_iters = 1;
  CHECK(run_command("solve", starved, scratch("exit_iters"), log) == kExitNoConvergence);

  RunConfig strict = cfg;
  strict.verify_regime = "torsion";
  strict.hopf_frac = 0.999;  // torsion boundary ratio is about 0.995 of the median
  CHECK(run_command("verify", strict, scratch("exit_verify"), log) == kExitVerification);
}

TEST_CASE("command line binary") {
  const fs::path dir = scratch("cli");
  CHECK(run_cli("--help", dir / "log") == 0);
  CHECK(slurp(dir / "log").find("FRACLOG_GRID_N") != std::string::npos);
  CHECK(run_cli("solve --p 2 --q 1.5 --r 3 --out " + (dir / "a").string(), dir / "log") == 1);
  CHECK(slurp(dir / "log").find("'s'") != std::string::npos);
  CHECK(run_cli("solve --s 0.3 --p 2 --q 1.5 --r 9 --out " + (dir / "a").string(), dir / "log") == 1);
  CHECK(run_cli("solve --s 0.3 --p 2 --q 1.5 --r 3 --n 16 --out " + (dir / "a").string(), dir / "log") == 0);
  CHECK(fs::exists(dir / "a" / "solution.csv"));

  std::ofstream(dir / "run.cfg") << "s = 0.4\np = 2\nq = 1.5\nr = 3\ngrid.n = 16\n";
  CHECK(run_cli("eigen --config " + (dir / "run.cfg").string() + " --s 0.3 --out " + (dir / "b").string(),
                dir / "log") == 0);
  const auto json = nlohmann::json::parse(slurp(dir / "b" / "report.json"));
  CHECK(json["config"]["s"] == "0.3");
  CHECK(run_cli("verify --s 0.3 --p 2 --q 1.5 --r 3 --n 16 --regime torsion --hopf-frac 0.999 --out " +
                    (dir / "c").string(),
                dir / "log") == 3);
  CHECK(run_cli("frobnicate", dir / "log") == 1);
}

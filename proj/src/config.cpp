#include "fraclog/config.hpp"

#include "fraclog/kernel.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace fraclog {

ProblemParams RunConfig::problem() const {
  ProblemParams pp;
  pp.dim = dim;
  pp.s = s;
  pp.p = p;
  pp.q = q;
  pp.r = r;
  return validate_params(pp);
}

DomainSpec RunConfig::domain() const {
  return dim == 2 ? DomainSpec::rectangle(domain_a, domain_b, domain_c, domain_d)
                  : DomainSpec::interval(domain_a, domain_b);
}

namespace {

std::string trim(std::string_view text) {
  std::size_t b = 0, e = text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  return std::string(text.substr(b, e - b));
}

template <class T>
T parse_number(const std::string& text, const char* what) {
  const std::string t = trim(text);
  T value{};
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && t[0] == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (t.empty() || ec != std::errc() || ptr != last) {
    throw std::invalid_argument("expected " + std::string(what) + ", got '" + t + "'");
  }
  return value;
}

double parse_real(const std::string& text) {
  const double v = parse_number<double>(text, "a real number");
  if (!std::isfinite(v)) throw std::invalid_argument("expected a finite real number, got '" + trim(text) + "'");
  return v;
}

std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<int>(item, "an integer list"));
  if (out.empty()) throw std::invalid_argument("expected a comma-separated integer list");
  return out;
}

std::string format_int_list(const std::vector<int>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) out += (k ? "," : "") + std::to_string(v[k]);
  return out;
}

ConfigKey real_key(std::string name, double RunConfig::*m, std::string help) {
  return {std::move(name), "real", std::move(help), [m](RunConfig& c, const std::string& t) { c.*m = parse_real(t); },
          [m](const RunConfig& c) { return format_real(c.*m); }};
}

ConfigKey int_key(std::string name, int RunConfig::*m, std::string help) {
  return {std::move(name), "int", std::move(help),
          [m](RunConfig& c, const std::string& t) { c.*m = parse_number<int>(t, "an integer"); },
          [m](const RunConfig& c) { return std::to_string(c.*m); }};
}

ConfigKey string_key(std::string name, std::string RunConfig::*m, std::string help) {
  return {std::move(name), "string", std::move(help), [m](RunConfig& c, const std::string& t) { c.*m = trim(t); },
          [m](const RunConfig& c) { return c.*m; }};
}

std::vector<ConfigKey> make_keys() {
  std::vector<ConfigKey> keys = {
      int_key("dim", &RunConfig::dim, "spatial dimension N (1 or 2)"),
      real_key("s", &RunConfig::s, "fractional order in (0,1)"),
      real_key("p", &RunConfig::p, "diffusion exponent, p >= 2"),
      real_key("q", &RunConfig::q, "reaction growth exponent, q > 1"),
      real_key("r", &RunConfig::r, "reaction saturation exponent, q < r < p_star"),
      real_key("domain.a", &RunConfig::domain_a, "left end of the x interval"),
      real_key("domain.b", &RunConfig::domain_b, "right end of the x interval"),
      real_key("domain.c", &RunConfig::domain_c, "lower end of the y interval (dim 2)"),
      real_key("domain.d", &RunConfig::domain_d, "upper end of the y interval (dim 2)"),
      int_key("grid.n", &RunConfig::grid_n, "cells per axis"),
      real_key("solver.tol", &RunConfig::solver_tol, "relative residual tolerance"),
      int_key("solver.max_iters", &RunConfig::solver_max_iters, "iteration cap per solve"),
      real_key("solver.armijo_c", &RunConfig::solver_armijo_c, "sufficient-decrease constant"),
      real_key("solver.shrink", &RunConfig::solver_shrink, "backtracking factor"),
      real_key("collapse_tol", &RunConfig::collapse_tol, "sup-norm below which a solution is trivial"),
      string_key("solve.initial", &RunConfig::solve_initial, "start: auto | random | eigen | root | zero"),
      real_key("solve.tau", &RunConfig::solve_tau, "amplitude of the eigenfunction start"),
      {"seed", "int", "seed for random starts",
       [](RunConfig& c, const std::string& t) { c.seed = parse_number<std::uint64_t>(t, "an unsigned integer"); },
       [](const RunConfig& c) { return std::to_string(c.seed); }},
      int_key("eigen.restarts", &RunConfig::eigen_restarts, "restarts of the eigenvalue search"),
      real_key("eigen.tol", &RunConfig::eigen_tol, "eigen residual tolerance (0: automatic)"),
      real_key("lambda", &RunConfig::lambda, "reaction parameter for solve and mountain-pass"),
      real_key("sweep.from", &RunConfig::sweep_from, "first lambda of a sweep"),
      real_key("sweep.to", &RunConfig::sweep_to, "last lambda of a sweep"),
      int_key("sweep.steps", &RunConfig::sweep_steps, "number of sweep points"),
      real_key("bracket_tol", &RunConfig::bracket_tol, "relative width of the threshold bracket"),
      real_key("threshold.lambda_high", &RunConfig::lambda_high, "continuation start (0: 10 lambda_0)"),
      real_key("threshold.step_factor", &RunConfig::step_factor, "continuation ratio in (0,1)"),
      int_key("mp.nodes", &RunConfig::mp_nodes, "nodes of the mountain-pass string"),
      real_key("mp.string_tol", &RunConfig::mp_string_tol, "gradient tolerance at the climbing node"),
      real_key("distinct_tol", &RunConfig::distinct_tol, "sup-norm gap separating two solutions"),
      string_key("verify.regime", &RunConfig::verify_regime, "sub | equi | super | torsion | all"),
      real_key("hopf_frac", &RunConfig::hopf_frac, "boundary-layer ratio relative to the median"),
      int_key("verify.trials", &RunConfig::verify_trials, "random starts per nonexistence check"),
      {"refine.ns", "int-list", "ascending grid sizes for refine",
       [](RunConfig& c, const std::string& t) { c.refine_ns = parse_int_list(t); },
       [](const RunConfig& c) { return format_int_list(c.refine_ns); }},
      int_key("threads", &RunConfig::threads, "worker threads"),
      string_key("cache_dir", &RunConfig::cache_dir, "directory for cached weights (empty: off)"),
  };
  return keys;
}

const ConfigKey* find_key(const std::string& name) {
  for (const auto& k : config_keys()) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

[[noreturn]] void fail(const std::string& key, const std::string& origin, const std::string& what) {
  throw ValidationError("config key '" + key + "' (" + origin + "): " + what);
}

// First offending key and a message, or nothing when the config is valid.
std::optional<std::pair<std::string, std::string>> first_problem(const RunConfig& c) {
  auto bad = [](std::string key, std::string msg) { return std::make_optional(std::make_pair(key, msg)); };
  if (c.dim != 1 && c.dim != 2) return bad("dim", "must be 1 or 2");
  if (!(c.s > 0.0 && c.s < 1.0)) return bad("s", "must lie in (0,1)");
  if (!(c.p >= 2.0)) return bad("p", "must be >= 2");
  if (!(c.p * c.s < c.dim)) return bad("s", "p s must be below dim");
  if (c.dim == 2 && !(c.p * c.s < 1.0)) return bad("s", "dim 2 needs p s < 1 (the pair weights diverge otherwise)");
  if (!(c.q > 1.0)) return bad("q", "must be > 1");
  if (!(c.r > c.q)) return bad("r", "must be > q");
  const double p_star = c.dim * c.p / (c.dim - c.p * c.s);
  if (!(c.r < p_star)) return bad("r", "must be < p_star = " + format_real(p_star));
  if (!(c.domain_b > c.domain_a)) return bad("domain.b", "must exceed domain.a");
  if (c.dim == 2 && !(c.domain_d > c.domain_c)) return bad("domain.d", "must exceed domain.c");
  if (c.grid_n < 1) return bad("grid.n", "must be positive");
  const double cells = c.dim == 2 ? double(c.grid_n) * c.grid_n : c.grid_n;
  if (cells > double(kMaxCells)) return bad("grid.n", "too many cells (limit " + std::to_string(kMaxCells) + ")");
  if (!(c.solver_tol > 0.0)) return bad("solver.tol", "must be positive");
  if (c.solver_max_iters < 0) return bad("solver.max_iters", "must be nonnegative");
  if (!(c.solver_armijo_c > 0.0 && c.solver_armijo_c < 1.0)) return bad("solver.armijo_c", "must lie in (0,1)");
  if (!(c.solver_shrink > 0.0 && c.solver_shrink < 1.0)) return bad("solver.shrink", "must lie in (0,1)");
  if (!(c.collapse_tol > 0.0)) return bad("collapse_tol", "must be positive");
  static const char* initials[] = {"auto", "random", "eigen", "root", "zero"};
  if (std::find(std::begin(initials), std::end(initials), c.solve_initial) == std::end(initials)) {
    return bad("solve.initial", "must be one of auto, random, eigen, root, zero");
  }
  if (c.eigen_restarts < 1) return bad("eigen.restarts", "must be positive");
  if (c.eigen_tol < 0.0) return bad("eigen.tol", "must be nonnegative");
  if (c.sweep_steps < 1) return bad("sweep.steps", "must be positive");
  if (!(c.bracket_tol > 0.0 && c.bracket_tol < 1.0)) return bad("bracket_tol", "must lie in (0,1)");
  if (c.lambda_high < 0.0) return bad("threshold.lambda_high", "must be nonnegative");
  if (!(c.step_factor > 0.0 && c.step_factor < 1.0)) return bad("threshold.step_factor", "must lie in (0,1)");
  if (c.mp_nodes < 3) return bad("mp.nodes", "must be at least 3");
  if (!(c.mp_string_tol > 0.0)) return bad("mp.string_tol", "must be positive");
  if (!(c.distinct_tol > 0.0)) return bad("distinct_tol", "must be positive");
  static const char* regimes[] = {"sub", "equi", "super", "torsion", "all"};
  if (std::find(std::begin(regimes), std::end(regimes), c.verify_regime) == std::end(regimes)) {
    return bad("verify.regime", "must be one of sub, equi, super, torsion, all");
  }
  if (!(c.hopf_frac > 0.0 && c.hopf_frac < 1.0)) return bad("hopf_frac", "must lie in (0,1)");
  if (c.verify_trials < 1) return bad("verify.trials", "must be positive");
  for (std::size_t k = 0; k < c.refine_ns.size(); ++k) {
    if (c.refine_ns[k] < 1 || (k && c.refine_ns[k] <= c.refine_ns[k - 1])) {
      return bad("refine.ns", "must be positive and strictly ascending");
    }
  }
  if (c.threads < 1) return bad("threads", "must be positive");
  return std::nullopt;
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = make_keys();
  return keys;
}

const std::vector<std::string>& required_config_keys() {
  static const std::vector<std::string> keys = {"s", "p", "q", "r"};
  return keys;
}

std::string env_var_name(const std::string& key) {
  std::string out = "FRACLOG_";
  for (char ch : key) out += ch == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return out;
}

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    const char* v = std::getenv(name.c_str());
    if (!v) return std::nullopt;
    return std::string(v);
  };
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value, const std::string& origin) {
  const ConfigKey* k = find_key(key);
  if (!k) fail(key, origin, "unknown key");
  try {
    k->set(cfg, value);
  } catch (const std::invalid_argument& e) {
    fail(key, origin, std::string("type mismatch (") + k->type + "): " + e.what());
  } catch (const std::out_of_range&) {
    fail(key, origin, "value out of range");
  }
}

RunConfig parse_config_text(const std::string& text, const std::string& origin, RunConfig base,
                            std::vector<std::string>* seen) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const std::string where = origin + " line " + std::to_string(lineno);
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config " + where + ": expected key = value, got '" + body + "'");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    apply_setting(base, key, body.substr(eq + 1), where);
    if (seen) seen->push_back(key);
  }
  return base;
}

RunConfig parse_config(const std::optional<std::filesystem::path>& file, const Settings& flags, const EnvLookup& env,
                       const Settings& defaults) {
  RunConfig cfg;
  std::map<std::string, std::string> origin;
  for (const auto& [key, value] : defaults) {
    apply_setting(cfg, key, value, "default");
    origin[key] = "default";
  }
  if (file) {
    std::ifstream in(*file, std::ios::binary);
    if (!in) throw ValidationError("cannot read config file " + file->string());
    std::stringstream ss;
    ss << in.rdbuf();
    std::vector<std::string> seen;
    const std::string name = file->string();
    cfg = parse_config_text(ss.str(), name, cfg, &seen);
    // Recover line numbers so later validation errors can point at them.
    std::istringstream lines(ss.str());
    std::string line;
    for (int lineno = 1; std::getline(lines, line); ++lineno) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto eq = line.find('=');
      if (eq != std::string::npos) origin[trim(std::string_view(line).substr(0, eq))] = name + " line " + std::to_string(lineno);
    }
  }
  if (env) {
    for (const auto& k : config_keys()) {
      const std::string var = env_var_name(k.name);
      if (auto v = env(var)) {
        apply_setting(cfg, k.name, *v, "environment " + var);
        origin[k.name] = "environment " + var;
      }
    }
  }
  for (const auto& [key, value] : flags) {
    apply_setting(cfg, key, value, "flag --" + key);
    origin[key] = "flag --" + key;
  }
  for (const auto& key : required_config_keys()) {
    if (!origin.count(key)) {
      throw ValidationError("config key '" + key + "': required key missing (set it in the file, via " +
                            env_var_name(key) + ", or with --" + key + ")");
    }
  }
  if (auto problem = first_problem(cfg)) {
    const auto it = origin.find(problem->first);
    fail(problem->first, it == origin.end() ? "built-in default" : it->second, problem->second);
  }
  validate_config(cfg);
  return cfg;
}

void validate_config(const RunConfig& cfg) {
  if (auto problem = first_problem(cfg)) fail(problem->first, "effective config", problem->second);
  validate_params(cfg.problem());
  validate_domain(cfg.domain());
}

std::string emit_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& k : config_keys()) out += k.name + " = " + k.get(cfg) + "\n";
  return out;
}

}  // namespace fraclog

#include "fraclog/app.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <ostream>

#include "fraclog/kernel.hpp"
#include "fraclog/parallel.hpp"

namespace fraclog {

using json = nlohmann::ordered_json;

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"eigen",         "torsion", "solve", "sweep", "threshold",
                                                 "mountain-pass", "verify",  "refine"};
  return names;
}

RunConfig regime_preset(const RunConfig& cfg, Regime regime) {
  RunConfig out = cfg;
  switch (regime) {
    case Regime::Sub:
      out.q = 0.5 * (1.0 + cfg.p);
      out.r = cfg.p + 1.0;
      break;
    case Regime::Equi:
      out.q = cfg.p;
      out.r = cfg.p + 1.0;
      break;
    case Regime::Super:
      out.q = cfg.p + 1.0;
      out.r = cfg.p + 2.0;
      break;
  }
  validate_config(out);
  return out;
}

namespace {

struct Setup {
  RunConfig cfg;
  ProblemParams params;
  std::shared_ptr<const Grid> grid;
  KernelWeights kw;
  SolveOptions solve;
  EigenOptions eigen;
  ThresholdOptions threshold;
  MountainPassOptions mp;
};

Setup make_setup(const RunConfig& cfg) {
  validate_config(cfg);
  set_thread_count(cfg.threads);
  Setup st;
  st.cfg = cfg;
  st.params = cfg.problem();
  st.grid = std::make_shared<const Grid>(build_grid(cfg.domain(), cfg.grid_n));
  st.kw = assemble_cached(st.grid, st.params, cfg.cache_dir);
  st.solve.residual_tol = cfg.solver_tol;
  st.solve.max_iters = cfg.solver_max_iters;
  st.solve.seed = cfg.seed;
  st.solve.armijo_c = cfg.solver_armijo_c;
  st.solve.shrink = cfg.solver_shrink;
  st.solve.collapse_tol = cfg.collapse_tol;
  st.eigen.tol = cfg.eigen_tol;
  st.eigen.restarts = cfg.eigen_restarts;
  st.eigen.seed = cfg.seed;
  st.threshold.lambda_high = cfg.lambda_high;
  st.threshold.step_factor = cfg.step_factor;
  st.threshold.bracket_tol = cfg.bracket_tol;
  st.mp.nodes = cfg.mp_nodes;
  st.mp.string_tol = cfg.mp_string_tol;
  st.mp.distinct_tol = cfg.distinct_tol;
  return st;
}

Vector root_constant(const Setup& st, double lambda) {
  const double root = std::pow(lambda, 1.0 / (st.params.r - st.params.q));
  return Vector::Constant(static_cast<Eigen::Index>(st.grid->size()), root);
}

// Start for a cold solve at lambda, as selected by solve.initial.
InitialGuess cold_start(const Setup& st, double lambda) {
  std::string kind = st.cfg.solve_initial;
  if (kind == "auto") kind = classify_regime(st.params) == Regime::Super ? "root" : "random";
  if (kind == "zero") return InitialGuess::zero();
  if (kind == "root") return InitialGuess::warm(root_constant(st, lambda));
  if (kind == "eigen") {
    const EigenPair eig = principal_eigenpair(st.kw, st.params.p, st.eigen);
    const Vector& u1 = eig.u1.values();
    return InitialGuess::scaled_eigen(st.cfg.solve_tau, u1 / sup_norm(u1));
  }
  return InitialGuess::random_positive();
}

SolveReport cold_solve(const Setup& st, double lambda) {
  SolveOptions opts = st.solve;
  opts.initial = cold_start(st, lambda);
  return solve_branch_point(lambda, std::nullopt, std::nullopt, st.params, st.kw, opts);
}

json solve_json(const SolveReport& rep) {
  json j;
  j["lambda"] = rep.lambda;
  j["status"] = to_string(rep.status);
  j["sup_norm"] = sup_norm(rep.u.values());
  j["min_value"] = rep.u.values().minCoeff();
  j["energy"] = rep.energy;
  j["initial_energy"] = rep.initial_energy;
  j["residual"] = rep.residual;
  j["iterations"] = rep.iterations;
  return j;
}

CsvTable branch_table(const std::vector<BranchPoint>& branch) {
  CsvTable t;
  t.file = "branch.csv";
  t.header = {"lambda", "sup_norm", "energy", "status"};
  for (const auto& b : branch) {
    t.rows.push_back({csv_number(b.lambda), csv_number(b.sup_norm), csv_number(b.energy), to_string(b.status)});
  }
  return t;
}

BranchPoint branch_point(const SolveReport& rep) {
  return {rep.lambda, sup_norm(rep.u.values()), rep.energy, rep.status, rep.nontrivial() ? rep.u.values() : Vector()};
}

int exit_for(SolveStatus status) {
  return status == SolveStatus::MaxIters || status == SolveStatus::NotFound ? kExitNoConvergence : kExitOk;
}

CheckResult make_check(std::string name, bool ok, std::vector<std::pair<std::string, double>> witness,
                       std::string notes = {}) {
  CheckResult c;
  c.name = std::move(name);
  c.outcome = ok ? Outcome::Pass : Outcome::Fail;
  c.witness = std::move(witness);
  if (!ok) c.notes = std::move(notes);
  return c;
}

CheckResult renamed(CheckResult c, std::string name) {
  c.name = std::move(name);
  return c;
}

// A check that could not run because a solve failed.
CheckResult broken_check(std::string name, const std::exception& e) {
  CheckResult c;
  c.name = std::move(name);
  c.outcome = Outcome::Fail;
  c.notes = e.what();
  return c;
}

std::vector<CheckResult> sub_suite(const Setup& st) {
  std::vector<CheckResult> out;
  const double s = st.params.s;

  // Uniqueness: random starts at lambda = 1 agree.
  std::vector<SolveReport> reps;
  for (int k = 0; k < st.cfg.verify_trials; ++k) {
    SolveOptions opts = st.solve;
    opts.seed = st.solve.seed + static_cast<std::uint64_t>(k);
    opts.initial = InitialGuess::random_positive();
    reps.push_back(solve_branch_point(1.0, std::nullopt, std::nullopt, st.params, st.kw, opts));
  }
  double spread = 0.0;
  bool all_converged = true;
  for (const auto& r : reps) {
    all_converged = all_converged && r.nontrivial();
    spread = std::max(spread, sup_norm(r.u.values() - reps.front().u.values()));
  }
  out.push_back(make_check("sub_uniqueness", all_converged && spread <= 1e-5,
                           {{"trials", static_cast<double>(reps.size())}, {"max_sup_difference", spread}},
                           "random starts disagree or failed to converge"));

  // Strict ordering between lambda = 2 and lambda = 1.
  SolveOptions opts = st.solve;
  opts.initial = InitialGuess::random_positive();
  const SolveReport hi = solve_branch_point(2.0, std::nullopt, std::nullopt, st.params, st.kw, opts);
  out.push_back(renamed(check_strict_order(hi.u, reps.front().u, s), "sub_strict_order"));
  out.push_back(renamed(check_hopf(reps.front().u, s, st.cfg.hopf_frac), "sub_hopf"));

  // Branch lambda = 2^-k decays strictly to zero.
  std::vector<BranchSample> branch;
  bool strict = true;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 6; ++k) {
    const double lambda = std::ldexp(1.0, -k);
    const SolveReport rep = solve_branch_point(lambda, std::nullopt, std::nullopt, st.params, st.kw, opts);
    const double sup = sup_norm(rep.u.values());
    strict = strict && sup < prev && rep.status != SolveStatus::MaxIters;
    prev = sup;
    branch.push_back({lambda, rep.u.values()});
  }
  CheckResult decay = check_limit_branch(branch, Vector::Zero(branch.front().u.size()), 1e-3);
  decay.name = "sub_branch_decay";
  decay.witness.emplace_back("strictly_decreasing", strict ? 1.0 : 0.0);
  if (!strict) {
    decay.outcome = Outcome::Fail;
    decay.notes += "sup-norms not strictly decreasing";
  }
  out.push_back(decay);
  return out;
}

std::vector<CheckResult> equi_suite(const Setup& st) {
  std::vector<CheckResult> out;
  const EigenPair eig = principal_eigenpair(st.kw, st.params.p, st.eigen);
  const double l1 = eig.lambda1;
  for (double f : {0.5, 0.9, 1.0}) {
    CheckResult c = check_nonexistence_equi(st.params, st.kw, f * l1, l1, st.cfg.verify_trials, st.solve);
    c.name = "equi_nonexistence@" + csv_number(f) + "lambda1";
    out.push_back(std::move(c));
  }
  SolveOptions opts = st.solve;
  opts.initial = InitialGuess::random_positive();
  const SolveReport above = solve_branch_point(1.2 * l1, std::nullopt, std::nullopt, st.params, st.kw, opts);
  const double sup_above = sup_norm(above.u.values());
  out.push_back(make_check("equi_existence@1.2lambda1", above.nontrivial(),
                           {{"lambda", 1.2 * l1}, {"sup_norm", sup_above}, {"residual", above.residual}},
                           std::string("solve ended as ") + to_string(above.status)));

  // Branch lambda = lambda1 (1 + 2^-k) approaching lambda1 from above.
  try {
    const SolveReport start = solve_branch_point(2.0 * l1, std::nullopt, std::nullopt, st.params, st.kw, opts);
    if (!start.nontrivial()) throw SolverError("no nontrivial solution at 2 lambda1");
    const auto branch = approach_branch(st.params, st.kw, l1, 1.0 / 256.0, 9, start.u, 2.0 * l1, st.solve);
    const double tol = 1e-2 * sup_norm(branch.front().u);
    out.push_back(renamed(check_limit_branch(branch, Vector::Zero(start.u.size()), tol), "equi_branch_decay"));
  } catch (const SolverError& e) {
    out.push_back(broken_check("equi_branch_decay", e));
  }
  return out;
}

std::vector<CheckResult> super_suite(const Setup& st) {
  std::vector<CheckResult> out;
  const double s = st.params.s;
  const EigenPair eig = principal_eigenpair(st.kw, st.params.p, st.eigen);
  const double l1 = eig.lambda1;
  const double l0 = lower_bound_lambda0(st.params, l1);

  // Below lambda_0 the reaction stays under lambda1 t^{p-1}; solves from the
  // constant supersolution and from random starts must all collapse.
  {
    double worst = -std::numeric_limits<double>::infinity();
    int collapsed = 0, trials = 0;
    for (double f : {0.5, 0.99}) {
      const LogisticParams lp = LogisticParams::from(st.params, f * l0);
      for (int k = -600; k <= 600; ++k) {
        const double t = std::pow(10.0, k / 100.0);
        worst = std::max(worst, (reaction(lp, t) - l1 * std::pow(t, st.params.p - 1.0)) /
                                    (l1 * std::pow(t, st.params.p - 1.0)));
      }
      SolveOptions opts = st.solve;
      opts.initial = InitialGuess::warm(root_constant(st, f * l0));
      for (int k = 0; k <= st.cfg.verify_trials; ++k) {
        if (k > 0) {
          opts.initial = InitialGuess::random_positive();
          opts.seed = st.solve.seed + static_cast<std::uint64_t>(k);
        }
        const SolveReport rep = solve_branch_point(f * l0, std::nullopt, std::nullopt, st.params, st.kw, opts);
        ++trials;
        if (rep.status == SolveStatus::Collapsed) ++collapsed;
      }
    }
    out.push_back(make_check("super_nonexistence_below_lambda0", worst <= 1e-12 && collapsed == trials,
                             {{"lambda0", l0},
                              {"lambda1", l1},
                              {"max_relative_reaction_excess", worst},
                              {"trials", static_cast<double>(trials)},
                              {"collapsed", static_cast<double>(collapsed)}},
                             "a trial below lambda_0 did not collapse or the reaction bound fails"));
  }

  const ThresholdReport th = detect_threshold(st.params, st.kw, st.solve, st.threshold, &eig);
  const double ls = th.lambda_star_h;
  out.push_back(make_check("super_threshold_bracket",
                           th.bracket_width <= st.threshold.bracket_tol * ls && ls >= th.lambda_0,
                           {{"lambda_star_h", ls},
                            {"lambda_no", th.lambda_no},
                            {"bracket_width", th.bracket_width},
                            {"lambda0", th.lambda_0}},
                           "bracket too wide or below the nonexistence bound"));

  // Nontrivial branch points: sup-norm grows with lambda.
  {
    std::vector<std::pair<double, double>> pts;
    for (const auto& b : th.branch) {
      if (b.status == SolveStatus::Converged) pts.emplace_back(b.lambda, b.sup_norm);
    }
    std::sort(pts.begin(), pts.end());
    bool mono = true;
    for (std::size_t k = 1; k < pts.size(); ++k) mono = mono && pts[k].second >= pts[k - 1].second;
    out.push_back(make_check("super_branch_monotone", mono && pts.size() >= 2,
                             {{"points", static_cast<double>(pts.size())}},
                             "sup-norm decreases somewhere along the solvable branch"));
  }

  const double lambda = 1.5 * ls;
  const SolveReport u = solve_branch_point(lambda, th.u_star, ls, st.params, st.kw, st.solve);
  const double sup_u = sup_norm(u.u.values());
  out.push_back(renamed(check_hopf(u.u, s, st.cfg.hopf_frac), "super_hopf"));
  try {
    const SolveReport v = mountain_pass(st.params, lambda, st.kw, u, st.solve, st.mp);
    const double sup_v = sup_norm(v.u.values());
    const double excess = (v.u.values() - u.u.values()).maxCoeff();
    out.push_back(make_check("super_mountain_pass",
                             v.status == SolveStatus::Converged && sup_v > 0.0 && sup_v < sup_u && excess <= 0.0 &&
                                 v.residual <= 1e-6,
                             {{"lambda", lambda},
                              {"sup_u", sup_u},
                              {"sup_v", sup_v},
                              {"max_v_minus_u", excess},
                              {"residual", v.residual},
                              {"iterations", static_cast<double>(v.iterations)}},
                             std::string("mountain pass ended as ") + to_string(v.status)));
    if (v.status == SolveStatus::Converged) out.push_back(renamed(check_strict_order(u.u, v.u, s), "super_strict_order"));
  } catch (const std::exception& e) {
    out.push_back(broken_check("super_mountain_pass", e));
  }

  try {
    const auto branch = approach_branch(st.params, st.kw, ls, st.threshold.bracket_tol, 6, u.u, lambda, st.solve);
    const double tol = std::sqrt(st.threshold.bracket_tol) * sup_norm(th.u_star.values());
    out.push_back(renamed(check_limit_branch(branch, th.u_star.values(), tol), "super_limit_branch"));
  } catch (const SolverError& e) {
    out.push_back(broken_check("super_limit_branch", e));
  }
  return out;
}

std::vector<CheckResult> torsion_suite(const Setup& st) {
  std::vector<CheckResult> out;
  SolveOptions a = st.solve, b = st.solve;
  b.seed = st.solve.seed + 1;
  const SolveReport ra = torsion_solve(st.kw, st.params.p, a);
  const SolveReport rb = torsion_solve(st.kw, st.params.p, b);
  const double diff = sup_norm(ra.u.values() - rb.u.values());
  const double min_v = ra.u.values().minCoeff();
  out.push_back(make_check("torsion_unique_positive",
                           ra.status == SolveStatus::Converged && rb.status == SolveStatus::Converged &&
                               diff <= 1e-6 && min_v > 0.0,
                           {{"max_sup_difference", diff}, {"min_value", min_v}, {"residual", ra.residual}},
                           "starts disagree, a solve failed, or the solution is not positive"));
  out.push_back(renamed(check_hopf(ra.u, st.params.s, st.cfg.hopf_frac), "torsion_hopf"));
  return out;
}

std::string file_safe(std::string name) {
  for (char& ch : name) {
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_' && ch != '-') ch = '_';
  }
  return name;
}

json checks_json(const std::vector<CheckResult>& checks) {
  json arr = json::array();
  for (const auto& c : checks) {
    json j;
    j["name"] = c.name;
    j["outcome"] = to_string(c.outcome);
    json w = json::object();
    for (const auto& [k, v] : c.witness) w[k] = std::isfinite(v) ? json(v) : json(csv_number(v));
    j["witness"] = w;
    j["notes"] = c.notes;
    arr.push_back(j);
  }
  return arr;
}

}  // namespace

std::vector<CheckResult> verify_suite(const std::string& suite, const RunConfig& cfg) {
  if (suite == "sub") return sub_suite(make_setup(regime_preset(cfg, Regime::Sub)));
  if (suite == "equi") return equi_suite(make_setup(regime_preset(cfg, Regime::Equi)));
  if (suite == "super") return super_suite(make_setup(regime_preset(cfg, Regime::Super)));
  if (suite == "torsion") return torsion_suite(make_setup(cfg));
  throw ValidationError("unknown verify suite '" + suite + "'");
}

CommandOutcome execute(const std::string& command, const RunConfig& cfg) {
  CommandOutcome out;
  Report& rep = out.report;
  rep.command = command;
  rep.config = cfg;
  json& res = rep.results;

  if (command == "verify") {
    std::vector<std::string> suites;
    if (cfg.verify_regime == "all") {
      suites = {"sub", "equi", "super", "torsion"};
    } else {
      suites = {cfg.verify_regime};
    }
    CsvTable t;
    t.file = "checks.csv";
    t.header = {"suite", "check", "outcome", "key", "value"};
    bool all_pass = true;
    json per_suite = json::object();
    for (const auto& suite : suites) {
      const auto checks = verify_suite(suite, cfg);
      for (const auto& c : checks) {
        if (c.applicable() && !c.passed()) all_pass = false;
        CsvTable w;
        w.file = "check_" + suite + "_" + file_safe(c.name) + ".csv";
        w.header = {"key", "value"};
        w.rows.push_back({"outcome", to_string(c.outcome)});
        for (const auto& [k, v] : c.witness) w.rows.push_back({k, csv_number(v)});
        rep.tables.push_back(std::move(w));
        if (c.witness.empty()) t.rows.push_back({suite, c.name, to_string(c.outcome), "", ""});
        for (const auto& [k, v] : c.witness) t.rows.push_back({suite, c.name, to_string(c.outcome), k, csv_number(v)});
      }
      per_suite[suite] = checks_json(checks);
    }
    res["suites"] = per_suite;
    res["all_pass"] = all_pass;
    rep.tables.push_back(std::move(t));
    out.exit_code = all_pass ? kExitOk : kExitVerification;
    return out;
  }

  if (command == "refine") {
    validate_config(cfg);
    set_thread_count(cfg.threads);
    RefinementOptions ro;
    ro.cache_dir = cfg.cache_dir;
    const Setup st = make_setup(cfg);
    ro.solve = st.solve;
    ro.threshold = st.threshold;
    const auto rows = refinement_study(st.params, cfg.domain(), cfg.refine_ns, ro);
    CsvTable t;
    t.file = "refinement.csv";
    t.header = {"n", "lambda1", "lambda_star", "lambda_fixed", "sup_norm", "delta_lambda1", "delta_lambda_star",
                "delta_sup"};
    json arr = json::array();
    for (const auto& r : rows) {
      t.rows.push_back({std::to_string(r.n), csv_number(r.lambda1), csv_number(r.lambda_star),
                        csv_number(r.lambda_fixed), csv_number(r.sup_norm), csv_number(r.delta_lambda1),
                        csv_number(r.delta_lambda_star), csv_number(r.delta_sup)});
      arr.push_back({{"n", r.n}, {"lambda1", r.lambda1}, {"lambda_star", csv_number(r.lambda_star)},
                     {"sup_norm", r.sup_norm}});
    }
    res["rows"] = arr;
    rep.tables.push_back(std::move(t));
    return out;
  }

  const Setup st = make_setup(cfg);
  const double s = st.params.s;
  res["regime"] = to_string(classify_regime(st.params));
  res["cells"] = st.grid->size();

  if (command == "eigen") {
    const EigenPair eig = principal_eigenpair(st.kw, st.params.p, st.eigen);
    res["lambda1"] = eig.lambda1;
    res["residual"] = eig.residual;
    res["restarts_agreement"] = eig.restarts_agreement;
    res["accepted_restarts"] = eig.accepted_restarts;
    res["discarded_restarts"] = eig.discarded_restarts;
    res["iterations"] = eig.iterations;
    rep.tables.push_back(field_table("solution.csv", *st.grid, s, {{"value", eig.u1.values()}}));
  } else if (command == "torsion") {
    const SolveReport t = torsion_solve(st.kw, st.params.p, st.solve);
    res["solve"] = solve_json(t);
    rep.tables.push_back(field_table("solution.csv", *st.grid, s, {{"value", t.u.values()}}));
    out.exit_code = exit_for(t.status);
  } else if (command == "solve") {
    const SolveReport r = cold_solve(st, cfg.lambda);
    res["solve"] = solve_json(r);
    rep.tables.push_back(field_table("solution.csv", *st.grid, s, {{"value", r.u.values()}}));
    out.exit_code = exit_for(r.status);
  } else if (command == "sweep") {
    std::vector<BranchPoint> branch;
    std::optional<SolveReport> warm;
    SolveReport last;
    for (int k = 0; k < cfg.sweep_steps; ++k) {
      const double lambda = cfg.sweep_steps == 1
                                ? cfg.sweep_from
                                : cfg.sweep_from + (cfg.sweep_to - cfg.sweep_from) * k / (cfg.sweep_steps - 1);
      last = warm ? solve_branch_point(lambda, warm->u, warm->lambda, st.params, st.kw, st.solve)
                  : cold_solve(st, lambda);
      branch.push_back(branch_point(last));
      if (last.nontrivial()) {
        warm = last;
      } else {
        warm.reset();
      }
      if (last.status == SolveStatus::MaxIters) out.exit_code = kExitNoConvergence;
    }
    res["points"] = branch.size();
    res["last"] = solve_json(last);
    rep.tables.push_back(branch_table(branch));
    rep.tables.push_back(field_table("solution.csv", *st.grid, s, {{"value", last.u.values()}}));
  } else if (command == "threshold") {
    const EigenPair eig = principal_eigenpair(st.kw, st.params.p, st.eigen);
    const ThresholdReport th = detect_threshold(st.params, st.kw, st.solve, st.threshold, &eig);
    res["lambda_star_h"] = th.lambda_star_h;
    res["lambda_no"] = th.lambda_no;
    res["bracket_width"] = th.bracket_width;
    res["lambda0"] = th.lambda_0;
    res["lambda1"] = th.lambda1;
    res["u_star_sup_norm"] = sup_norm(th.u_star.values());
    rep.tables.push_back(branch_table(th.branch));
    rep.tables.push_back(field_table("solution.csv", *st.grid, s, {{"value", th.u_star.values()}}));
  } else if (command == "mountain-pass") {
    if (classify_regime(st.params) != Regime::Super) {
      throw ValidationError("mountain-pass needs the superdiffusive regime (q > p)");
    }
    const SolveReport u = cold_solve(st, cfg.lambda);
    res["u_lambda"] = solve_json(u);
    if (!u.nontrivial()) {
      res["mountain_pass"] = nullptr;
      rep.tables.push_back(field_table("solution.csv", *st.grid, s, {{"u_lambda", u.u.values()}}));
      out.exit_code = kExitNoConvergence;
      return out;
    }
    const SolveReport v = mountain_pass(st.params, cfg.lambda, st.kw, u, st.solve, st.mp);
    res["mountain_pass"] = solve_json(v);
    rep.tables.push_back(
        field_table("solution.csv", *st.grid, s, {{"v_lambda", v.u.values()}, {"u_lambda", u.u.values()}}));
    out.exit_code = exit_for(v.status);
  } else {
    throw ValidationError("unknown command '" + command + "'");
  }
  return out;
}

int run_command(const std::string& command, const RunConfig& cfg, const std::filesystem::path& out_dir,
                std::ostream& log) {
  CommandOutcome out;
  try {
    out = execute(command, cfg);
  } catch (const ValidationError& e) {
    log << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const SolverError& e) {
    log << "solver failure: " << e.what() << "\n";
    return kExitNoConvergence;
  }
  try {
    for (const auto& path : write_report(out.report, out_dir)) log << "wrote " << path.string() << "\n";
  } catch (const std::runtime_error& e) {
    log << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  log << command << ": " << (out.exit_code == kExitOk ? "ok" : "exit " + std::to_string(out.exit_code)) << "\n";
  return out.exit_code;
}

}  // namespace fraclog

// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fraclog/app.hpp"
#include "support.hpp"

using namespace fraclog;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool ok = true;
  std::vector<std::string> notes;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      notes.push_back("failed: " + what);
    }
  }
  void note(const std::string& what) { notes.push_back(what); }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

Vector random_vector(Eigen::Index n, std::mt19937_64& gen, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = u(gen);
  return v;
}

RunConfig base_config(double q, double r) {
  RunConfig cfg;
  cfg.s = 0.3;
  cfg.p = 2.0;
  cfg.q = q;
  cfg.r = r;
  cfg.grid_n = 64;
  validate_config(cfg);
  return cfg;
}

const CheckResult* find_check(const std::vector<CheckResult>& checks, const std::string& name) {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

// Every check of a suite must pass; returns the checks for witness lookups.
std::vector<CheckResult> run_suite(Verdict& v, const std::string& suite, const RunConfig& cfg) {
  auto checks = verify_suite(suite, cfg);
  for (const auto& c : checks) v.require(c.passed(), c.name + " (" + c.notes + ")");
  return checks;
}

double witness(Verdict& v, const std::vector<CheckResult>& checks, const std::string& check, const std::string& key) {
  const CheckResult* c = find_check(checks, check);
  v.require(c != nullptr, "check " + check + " present");
  return c ? c->witness_value(key) : std::nan("");
}

// Mass-weighted 2-norm of (L u)_i - f(u_i), from the operator directly.
double residual_norm(const Vector& u, const KernelWeights& kw, const LogisticParams& lp) {
  const Vector Lu = apply_operator(u, kw, lp.p);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double r = Lu[i] - reaction(lp, u[i]);
    acc += kw.grid->measure[i] * r * r;
  }
  return std::sqrt(acc);
}

Verdict kernel_correctness() {
  Verdict v;
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_1d = 0.0;
  for (int k = 0; k < 50; ++k) {
    const double beta = 1.0 + 0.2 + 0.7 * u(gen);
    const double a0 = u(gen), wa = 0.005 + 0.2 * u(gen), wb = 0.005 + 0.2 * u(gen);
    const double gap = k % 3 == 0 ? 0.0 : 0.3 * u(gen);
    const Interval a{a0, a0 + wa}, b{a0 + wa + gap, a0 + wa + gap + wb};
    worst_1d = std::max(worst_1d, rel(pair_weight_1d(a, b, beta), oracle::pair_1d(a, b, beta)));
  }
  for (int k = 0; k < 50; ++k) {
    const double beta = 1.0 + 0.2 + 0.7 * u(gen);
    double lo = 0.9 * u(gen), hi = lo + 0.005 + 0.1 * u(gen);
    if (k % 4 == 0) lo = 0.0;
    if (k % 4 == 1) hi = 1.0;
    const Interval cell{lo, hi}, dom{0.0, 1.0};
    worst_1d = std::max(worst_1d, rel(exterior_weight_1d(cell, dom, beta), oracle::exterior_1d(cell, dom, beta)));
  }
  v.require(worst_1d <= 1e-8, "100 1D weights within 1e-8");
  v.note("1D worst rel " + fmt(worst_1d));

  // 2D: cells of an 8 x 8 grid on the unit square. Pairs are kept one cell
  // apart and boundary cells use ps < 1/2 so the Monte-Carlo variance is finite.
  const double h = 1.0 / 8;
  auto cell = [&](int ix, int iy) { return Rect{{ix * h, (ix + 1) * h}, {iy * h, (iy + 1) * h}}; };
  std::uniform_int_distribution<int> idx(0, 7);
  const Rect dom{{0, 1}, {0, 1}};
  double worst_z = 0.0;
  int outside = 0;
  for (int k = 0; k < 20; ++k) {
    const std::uint64_t seed = 100 + static_cast<std::uint64_t>(k);
    double w = 0.0;
    oracle::Estimate est;
    if (k < 10) {
      const double ps = 0.3 + 0.6 * u(gen);
      int ax, ay, bx, by;
      do {
        ax = idx(gen), ay = idx(gen), bx = idx(gen), by = idx(gen);
      } while (std::max(std::abs(ax - bx), std::abs(ay - by)) < 2);
      w = pair_weight_2d(cell(ax, ay), cell(bx, by), ps);
      est = oracle::mc_pair_2d(cell(ax, ay), cell(bx, by), ps, 400000, seed);
    } else {
      const int cx = idx(gen), cy = idx(gen);
      const bool boundary = cx == 0 || cy == 0 || cx == 7 || cy == 7;
      const double ps = boundary ? 0.2 + 0.25 * u(gen) : 0.3 + 0.6 * u(gen);
      w = exterior_weight_2d(cell(cx, cy), dom, ps);
      est = oracle::mc_exterior_2d(cell(cx, cy), dom, ps, 400000, seed);
    }
    const double z = std::abs(w - est.mean) / est.se;
    worst_z = std::max(worst_z, z);
    if (z > 3.0) ++outside;
  }
  v.require(outside == 0, "20 2D weights within 3 standard errors");
  v.note("2D worst |z| " + fmt(worst_z));
  return v;
}

Verdict operator_consistency() {
  Verdict v;
  double worst_pair = 0.0, worst_fd = 0.0;
  for (double p : {2.0, 3.0}) {
    const KernelWeights kw = oracle::weights_1d(64, 0.3, p);
    const Vector& mass = kw.grid->measure;
    std::mt19937_64 gen(static_cast<std::uint64_t>(p * 31));
    for (int k = 0; k < 20; ++k) {
      const Vector u = random_vector(64, gen, -1, 1);
      worst_pair = std::max(worst_pair, rel(pairing(apply_operator(u, kw, p), u, mass), gagliardo_energy(u, kw, p)));
    }
    // grad_phi against central differences of energy_phi, cycling through the regimes
    const double qs[] = {0.5 * (1 + p), p, p + 1};
    for (int k = 0; k < 20; ++k) {
      const LogisticParams lp{1.0 + 4.0 * (k % 5), p, qs[k % 3], qs[k % 3] + 1.0};
      const Vector u = random_vector(64, gen, 0.05, 2.0);
      const Vector an = grad_phi(u, kw, lp).cwiseProduct(mass);
      Vector fd(64);
      for (Eigen::Index i = 0; i < 64; ++i) {
        const double step = 1e-6 * std::max(1.0, std::abs(u[i]));
        Vector up = u, um = u;
        up[i] += step;
        um[i] -= step;
        fd[i] = (energy_phi(up, kw, lp) - energy_phi(um, kw, lp)) / (2 * step);
      }
      worst_fd = std::max(worst_fd, (fd - an).norm() / an.norm());
    }
  }
  v.require(worst_pair <= 1e-10, "<Lu,u> equals the energy to 1e-10");
  v.require(worst_fd <= 1e-5, "grad_phi matches finite differences to 1e-5");
  v.note("pairing worst rel " + fmt(worst_pair) + ", gradient worst rel " + fmt(worst_fd));
  return v;
}

Verdict structural_inequalities() {
  Verdict v;
  int pnp_bad = 0, mono_bad = 0, scalar_bad = 0;
  for (double p : {2.0, 2.5, 3.0}) {
    const KernelWeights kw = oracle::weights_1d(64, 0.3, p);
    const Vector& mass = kw.grid->measure;
    std::mt19937_64 gen(static_cast<std::uint64_t>(p * 100));
    for (int k = 0; k < 200; ++k) {
      const Vector u = random_vector(64, gen, -1, 1);
      const Vector w = random_vector(64, gen, -1, 1);
      const Vector up = u.cwiseMax(0.0), um = (-u).cwiseMax(0.0);
      const Vector Lu = apply_operator(u, kw, p);
      const double slack = 1e-12 * gagliardo_energy(u, kw, p);
      if (gagliardo_energy(up, kw, p) > pairing(Lu, up, mass) + slack) ++pnp_bad;
      if (gagliardo_energy(um, kw, p) > pairing(Lu, -um, mass) + slack) ++pnp_bad;
      // strict T-monotonicity: the pairing is positive unless (u - w)+ = 0
      const Vector d = (u - w).cwiseMax(0.0);
      const double t = pairing(Lu - apply_operator(w, kw, p), d, mass);
      if (d.maxCoeff() > 0.0 ? !(t > 0.0) : t != 0.0) ++mono_bad;
    }
    std::uniform_real_distribution<double> x(-10, 10);
    for (int k = 0; k < 100000; ++k) {
      const double a = x(gen);
      double b = x(gen), c = k % 100 == 0 ? b : x(gen);
      if (b < c) std::swap(b, c);
      const double lhs = signed_power(a - b, p - 1) - signed_power(a - c, p - 1);
      const double rhs = std::pow(2.0, 2 - p) * signed_power(c - b, p - 1);
      const double scale = std::abs(signed_power(a - b, p - 1)) + std::abs(signed_power(a - c, p - 1)) + 1.0;
      if (lhs > rhs + 1e-13 * scale) ++scalar_bad;
    }
  }
  v.require(pnp_bad == 0, "discrete (pnp) on 200 random u per p");
  v.require(mono_bad == 0, "T-monotonicity on 200 random pairs per p");
  v.require(scalar_bad == 0, "scalar inequality on 1e5 triples per p");
  v.note("violations pnp/T/scalar " + std::to_string(pnp_bad) + "/" + std::to_string(mono_bad) + "/" +
         std::to_string(scalar_bad));
  return v;
}

Verdict eigenvalue() {
  Verdict v;
  const KernelWeights kw2 = oracle::weights_1d(64, 0.3, 2.0);
  const double l = principal_eigenpair(kw2, 2.0).lambda1, dense = oracle::dense_lambda1(kw2);
  v.require(rel(l, dense) <= 1e-8, "p = 2 matches the dense eigensolve to 1e-8");
  v.note("p=2 rel " + fmt(rel(l, dense)));

  double worst_cf = 0.0;
  for (auto [p, s] : {std::pair{2.0, 0.3}, std::pair{3.0, 0.2}, std::pair{2.5, 0.3}}) {
    const double ps = p * s;
    worst_cf = std::max(worst_cf, rel(principal_eigenpair(oracle::weights_1d(1, s, p), p).lambda1,
                                      4.0 / (ps * (1.0 - ps))));
  }
  v.require(worst_cf <= 1e-13, "n = 1 closed form for three (p, s)");
  v.note("n=1 rel " + fmt(worst_cf));

  const KernelWeights kw3 = oracle::weights_1d(64, 0.3, 3.0);
  EigenOptions opts;
  opts.restarts = 5;
  const EigenPair e3 = principal_eigenpair(kw3, 3.0, opts);
  v.require(e3.accepted_restarts == 5, "five positive restarts accepted");
  v.require(e3.restarts_agreement <= 1e-6, "p = 3 restarts agree to 1e-6");
  v.require(e3.u1.values().minCoeff() > 0.0, "u1 > 0 on every cell");
  v.note("p=3 spread " + fmt(e3.restarts_agreement) + ", min u1 " + fmt(e3.u1.values().minCoeff()));
  return v;
}

Verdict subdiffusive() {
  Verdict v;
  const auto checks = run_suite(v, "sub", base_config(1.5, 3));
  const double spread = witness(v, checks, "sub_uniqueness", "max_sup_difference");
  const double trials = witness(v, checks, "sub_uniqueness", "trials");
  const double gap = witness(v, checks, "sub_strict_order", "min_gap_over_ds");
  const double last = witness(v, checks, "sub_branch_decay", "final_distance");
  v.require(trials == 10 && spread <= 1e-5, "10 random starts agree to 1e-5");
  v.require(gap > 0.0, "positive Hopf-ratio gap between lambda = 2 and 1");
  v.require(witness(v, checks, "sub_branch_decay", "strictly_decreasing") == 1.0 && last < 1e-3,
            "strictly decreasing branch ending below 1e-3");
  v.note("spread " + fmt(spread) + ", gap/d^s " + fmt(gap) + ", last sup " + fmt(last));
  return v;
}

Verdict equidiffusive() {
  Verdict v;
  const RunConfig cfg = base_config(2, 3);
  const auto checks = run_suite(v, "equi", cfg);
  for (const char* f : {"0.5", "0.9", "1"}) {
    const std::string name = std::string("equi_nonexistence@") + f + "lambda1";
    const CheckResult* c = find_check(checks, name);
    v.require(c && c->passed(), name);
  }
  // the collapse criterion itself, at lambda1 exactly
  const ProblemParams pp = cfg.problem();
  const KernelWeights kw = assemble(oracle::interval_grid(64), pp);
  const double l1 = principal_eigenpair(kw, 2.0).lambda1;
  double worst = 0.0;
  for (double f : {0.5, 0.9, 1.0}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      SolveOptions o;
      o.seed = seed;
      o.initial = InitialGuess::random_positive();
      worst = std::max(worst, sup_norm(solve_branch_point(f * l1, std::nullopt, std::nullopt, pp, kw, o).u.values()));
    }
  }
  v.require(worst < 1e-6, "solves at or below lambda1 end with sup-norm < 1e-6");
  v.note("lambda1 " + fmt(l1) + ", worst collapsed sup " + fmt(worst) + ", branch final " +
         fmt(witness(v, checks, "equi_branch_decay", "final_distance")));
  return v;
}

Verdict superdiffusive() {
  Verdict v;
  const RunConfig cfg = base_config(3, 4);
  const auto checks = run_suite(v, "super", cfg);
  const double ls = witness(v, checks, "super_threshold_bracket", "lambda_star_h");
  const double width = witness(v, checks, "super_threshold_bracket", "bracket_width");
  const double l0 = witness(v, checks, "super_threshold_bracket", "lambda0");
  v.require(width <= 1e-3 * ls, "bracket width <= 1e-3 lambda*_h");
  v.require(ls >= l0, "lambda*_h >= lambda_0");

  // Mountain pass recomputed here, residual measured from the operator.
  const ProblemParams pp = cfg.problem();
  const KernelWeights kw = assemble(oracle::interval_grid(64), pp);
  const EigenPair eig = principal_eigenpair(kw, 2.0);
  v.require(rel(lower_bound_lambda0(pp, eig.lambda1), l0) <= 1e-12, "lambda_0 reproduced");
  const ThresholdReport th = detect_threshold(pp, kw, SolveOptions{}, ThresholdOptions{}, &eig);
  const double lambda = 1.5 * th.lambda_star_h;
  const LogisticParams lp{lambda, pp.p, pp.q, pp.r};
  const SolveReport u = solve_branch_point(lambda, th.u_star, th.lambda_star_h, pp, kw, SolveOptions{});
  const SolveReport mp = mountain_pass(pp, lambda, kw, u, SolveOptions{});
  const Vector& uv = u.u.values();
  const Vector& vv = mp.u.values();
  const double res = residual_norm(vv, kw, lp);
  v.require(mp.status == SolveStatus::Converged, "mountain pass converged");
  v.require(sup_norm(vv) > 0.0 && sup_norm(vv) < sup_norm(uv), "0 < sup v < sup u");
  v.require((uv - vv).minCoeff() >= 0.0, "v <= u componentwise");
  v.require(res <= 1e-6, "mountain-pass residual <= 1e-6");
  v.require(residual_norm(uv, kw, lp) <= 1e-6, "u_lambda residual <= 1e-6");
  v.note("lambda0 " + fmt(l0) + ", lambda*_h " + fmt(ls) + ", width " + fmt(width) + ", sup u/v " +
         fmt(sup_norm(uv)) + "/" + fmt(sup_norm(vv)) + ", residual " + fmt(res) + ", limit final " +
         fmt(witness(v, checks, "super_limit_branch", "final_distance")));
  return v;
}

Verdict torsion() {
  Verdict v;
  const auto checks = run_suite(v, "torsion", base_config(1.5, 3));
  const double diff = witness(v, checks, "torsion_unique_positive", "max_sup_difference");
  const double min_ratio = witness(v, checks, "torsion_hopf", "min_ratio");
  const double layer = witness(v, checks, "torsion_hopf", "boundary_min_ratio");
  const double med = witness(v, checks, "torsion_hopf", "median_ratio");
  v.require(diff <= 1e-6, "two starts agree to 1e-6");
  v.require(witness(v, checks, "torsion_unique_positive", "min_value") > 0.0, "strictly positive");
  v.require(min_ratio > 0.0 && layer >= 0.1 * med, "Hopf ratio positive, boundary layer >= 0.1 median");
  v.note("diff " + fmt(diff) + ", min v/d^s " + fmt(min_ratio) + ", layer/median " + fmt(layer / med));
  return v;
}

Verdict refinement() {
  Verdict v;
  const RunConfig cfg = base_config(3, 4);
  RefinementOptions opts;
  const auto rows = refinement_study(cfg.problem(), cfg.domain(), {32, 64, 128}, opts);
  v.require(rows.size() == 3, "three rows");
  if (rows.size() == 3) {
    v.require(std::abs(rows[2].delta_lambda1) < std::abs(rows[1].delta_lambda1), "lambda1 deltas shrink");
    v.require(std::abs(rows[2].delta_lambda_star) < std::abs(rows[1].delta_lambda_star), "lambda* deltas shrink");
    v.note("d lambda1 " + fmt(rows[1].delta_lambda1) + " -> " + fmt(rows[2].delta_lambda1) + ", d lambda* " +
           fmt(rows[1].delta_lambda_star) + " -> " + fmt(rows[2].delta_lambda_star));
  }
  const double ps = cfg.p * cfg.s;
  const double full = principal_eigenpair(oracle::weights_1d(64, cfg.s, cfg.p), cfg.p).lambda1;
  const double half = principal_eigenpair(oracle::weights_1d(64, cfg.s, cfg.p, 0.0, 0.5), cfg.p).lambda1;
  const double dev = std::abs(half / full / std::pow(2.0, ps) - 1.0);
  v.require(dev <= 0.02, "halving the domain scales lambda1 by 2^{ps} within 2%");
  v.note("homogeneity deviation " + fmt(dev));
  return v;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict determinism() {
  Verdict v;
  const fs::path root = fs::temp_directory_path() / ("fraclog_acceptance_" + std::to_string(::getpid()));
  struct Case {
    std::string command;
    RunConfig cfg;
  };
  RunConfig mp = base_config(3, 4);
  mp.lambda = 11.0;
  const std::vector<Case> cases = {{"eigen", base_config(1.5, 3)},  {"torsion", base_config(1.5, 3)},
                                   {"solve", base_config(1.5, 3)},  {"sweep", base_config(1.5, 3)},
                                   {"threshold", base_config(3, 4)}, {"mountain-pass", mp},
                                   {"verify", base_config(1.5, 3)}, {"refine", base_config(3, 4)}};
  int files = 0;
  for (const auto& c : cases) {
    std::set<std::string> names[2];
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path dir = root / (c.command + std::to_string(rep));
      fs::remove_all(dir);
      std::ostringstream log;
      const int code = run_command(c.command, c.cfg, dir, log);
      v.require(code == kExitOk, c.command + " exits 0");
      for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() == ".csv") names[rep].insert(e.path().filename().string());
      }
    }
    v.require(!names[0].empty() && names[0] == names[1], c.command + " writes the same csv files");
    for (const auto& name : names[0]) {
      const bool same = slurp(root / (c.command + "0") / name) == slurp(root / (c.command + "1") / name);
      v.require(same, c.command + "/" + name + " byte-identical");
      ++files;
    }
  }
  fs::remove_all(root);
  v.note(std::to_string(files) + " csv files compared over " + std::to_string(cases.size()) + " commands");
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"kernel correctness", kernel_correctness},
      {"operator consistency", operator_consistency},
      {"structural inequalities", structural_inequalities},
      {"eigenvalue", eigenvalue},
      {"subdiffusive regime", subdiffusive},
      {"equidiffusive regime", equidiffusive},
      {"superdiffusive regime", superdiffusive},
      {"torsion and Hopf", torsion},
      {"refinement sanity", refinement},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[k].second();
    } catch (const std::exception& e) {
      v.ok = false;
      v.notes.push_back(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > 60.0) v.require(false, "finished within 60 s");
    if (!v.ok) ++failed;
    std::cout << (v.ok ? "PASS " : "FAIL ") << k + 1 << " " << criteria[k].first << " [" << fmt(secs) << " s]";
    for (const auto& n : v.notes) std::cout << "; " << n;
    std::cout << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}

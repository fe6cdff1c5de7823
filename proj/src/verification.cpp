#include "fraclog/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fraclog {

const char* to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Pass: return "pass";
    case Outcome::Fail: return "fail";
    case Outcome::NotApplicable: return "not_applicable";
  }
  return "unknown";
}

double CheckResult::witness_value(const std::string& key) const {
  for (const auto& [k, v] : witness) {
    if (k == key) return v;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

namespace {

Outcome outcome_of(bool ok) { return ok ? Outcome::Pass : Outcome::Fail; }

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

}  // namespace

CheckResult check_hopf(const DiscreteFunction& u, double s, double hopf_frac) {
  const Grid& grid = *u.grid();
  CheckResult res;
  res.name = "hopf";
  std::vector<double> ratio(grid.size());
  std::size_t argmin = 0, layer_argmin = 0;
  double layer_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    ratio[i] = u[i] / std::pow(grid.dist[static_cast<Eigen::Index>(i)], s);
    if (ratio[i] < ratio[argmin]) argmin = i;
    if (grid.touches_boundary(i) && ratio[i] < layer_min) {
      layer_min = ratio[i];
      layer_argmin = i;
    }
  }
  const double med = median(ratio);
  const double min_ratio = ratio[argmin];
  const bool positive = min_ratio > 0.0;
  const bool layer_ok = layer_min >= hopf_frac * med;
  res.outcome = outcome_of(positive && layer_ok);
  res.witness = {{"min_ratio", min_ratio},
                 {"min_cell", static_cast<double>(argmin)},
                 {"boundary_min_ratio", layer_min},
                 {"boundary_min_cell", static_cast<double>(layer_argmin)},
                 {"median_ratio", med},
                 {"hopf_frac", hopf_frac}};
  std::ostringstream notes;
  if (!positive) notes << "u/d^s vanishes or is negative at cell " << argmin << "; ";
  if (!layer_ok) notes << "boundary layer ratio at cell " << layer_argmin << " is below hopf_frac * median";
  res.notes = notes.str();
  return res;
}

CheckResult check_strict_order(const DiscreteFunction& u_hi, const DiscreteFunction& u_lo, double s) {
  require_same_grid(u_hi, u_lo);
  const Grid& grid = *u_hi.grid();
  CheckResult res;
  res.name = "strict_order";
  double min_gap = std::numeric_limits<double>::infinity();
  double min_ratio = std::numeric_limits<double>::infinity();
  std::size_t argmin = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double gap = u_hi[i] - u_lo[i];
    const double ratio = gap / std::pow(grid.dist[static_cast<Eigen::Index>(i)], s);
    if (gap < min_gap) {
      min_gap = gap;
      argmin = i;
    }
    min_ratio = std::min(min_ratio, ratio);
  }
  res.outcome = outcome_of(min_gap > 0.0 && min_ratio > 0.0);
  res.witness = {{"min_gap", min_gap}, {"min_gap_cell", static_cast<double>(argmin)}, {"min_gap_over_ds", min_ratio}};
  if (!res.passed()) res.notes = "ordering not strict at cell " + std::to_string(argmin);
  return res;
}

CheckResult check_nonexistence_equi(const ProblemParams& params, const KernelWeights& kw, double lambda,
                                    double lambda1, int trials, const SolveOptions& opts) {
  CheckResult res;
  res.name = "nonexistence_equi";
  res.witness = {{"lambda", lambda}, {"lambda1", lambda1}};
  if (classify_regime(params) != Regime::Equi || !(lambda <= lambda1)) {
    res.outcome = Outcome::NotApplicable;
    res.notes = "out of precondition: needs q = p and lambda <= lambda1";
    return res;
  }
  if (trials < 1) throw ValidationError("check_nonexistence_equi: trials must be positive");
  const Vector& mass = kw.grid->measure;
  const double p = params.p, r = params.r;
  const LogisticParams lp = LogisticParams::from(params, lambda);
  int collapsed = 0;
  double max_sup = 0.0;
  double worst_margin = std::numeric_limits<double>::infinity();
  double worst_pairing_gap = 0.0;
  bool identity_ok = true;
  for (int k = 0; k < trials; ++k) {
    SolveOptions trial_opts = opts;
    trial_opts.seed = opts.seed + static_cast<std::uint64_t>(k);
    trial_opts.initial = InitialGuess::random_positive();
    const SolveReport rep = solve_branch_point(lambda, std::nullopt, std::nullopt, params, kw, trial_opts);
    const Vector& u = rep.u.values();
    if (rep.status == SolveStatus::Collapsed) ++collapsed;
    max_sup = std::max(max_sup, sup_norm(u));

    // <grad Phi(u), u> = E(u) - lambda ||u||_p^p + ||u||_r^r for u >= 0.
    const double energy = gagliardo_energy(u, kw, p);
    const double np = std::pow(lp_norm(u, mass, p), p);
    const double nr = std::pow(lp_norm(u, mass, r), r);
    const double tested = energy - lambda * np + nr;
    const double lower = (lambda1 - lambda) * np + nr;
    const double scale = energy + lambda * np + nr;
    const double slack = 1e-9 * scale;
    if (tested < lower - slack) identity_ok = false;
    const double pairing_value = pairing(grad_phi(u, kw, lp), u, mass);
    worst_pairing_gap = std::max(worst_pairing_gap, std::abs(pairing_value - tested) / std::max(scale, 1e-300));
    if (nr > 0.0) worst_margin = std::min(worst_margin, tested / nr);
  }
  if (worst_pairing_gap > 1e-9) identity_ok = false;
  res.outcome = outcome_of(collapsed == trials && identity_ok);
  res.witness.emplace_back("trials", trials);
  res.witness.emplace_back("collapsed", collapsed);
  res.witness.emplace_back("max_sup_norm", max_sup);
  res.witness.emplace_back("min_tested_over_r_norm", worst_margin);
  res.witness.emplace_back("pairing_identity_gap", worst_pairing_gap);
  if (collapsed != trials) res.notes = std::to_string(trials - collapsed) + " trial(s) did not collapse; ";
  if (!identity_ok) res.notes += "tested-equation identity violated";
  return res;
}

CheckResult check_limit_branch(std::vector<BranchSample> branch, const Vector& target, double tol) {
  if (branch.size() < 3) throw ValidationError("check_limit_branch: need at least 3 branch points");
  std::stable_sort(branch.begin(), branch.end(),
                   [](const BranchSample& a, const BranchSample& b) { return a.lambda > b.lambda; });
  CheckResult res;
  res.name = "limit_branch";
  bool monotone = true;
  double prev = std::numeric_limits<double>::infinity();
  std::size_t first_break = 0;
  for (std::size_t k = 0; k < branch.size(); ++k) {
    if (branch[k].u.size() != target.size()) throw ValidationError("check_limit_branch: grid mismatch");
    const double dist = sup_norm(branch[k].u - target);
    res.witness.emplace_back("distance@" + std::to_string(branch[k].lambda), dist);
    if (dist > prev && monotone) {
      monotone = false;
      first_break = k;
    }
    prev = dist;
  }
  res.witness.emplace_back("final_distance", prev);
  res.witness.emplace_back("tol", tol);
  res.outcome = outcome_of(monotone && prev <= tol);
  if (!monotone) res.notes = "distance increases at lambda = " + std::to_string(branch[first_break].lambda) + "; ";
  if (prev > tol) res.notes += "final distance exceeds tol";
  return res;
}

std::vector<BranchSample> approach_branch(const ProblemParams& params, const KernelWeights& kw, double lambda_ref,
                                          double gap, int steps, const DiscreteFunction& start,
                                          double start_lambda, const SolveOptions& opts) {
  std::vector<BranchSample> out;
  DiscreteFunction warm = start;
  double warm_lambda = start_lambda;
  for (int k = steps - 1; k >= 0; --k) {
    const double lambda = lambda_ref * (1.0 + gap * std::ldexp(1.0, k));
    const SolveReport rep = solve_branch_point(lambda, warm, warm_lambda, params, kw, opts);
    if (!rep.nontrivial()) {
      throw SolverError("approach_branch: no nontrivial solution at lambda = " + std::to_string(lambda));
    }
    out.push_back({lambda, rep.u.values()});
    warm = rep.u;
    warm_lambda = lambda;
  }
  return out;
}

std::vector<RefinementRow> refinement_study(const ProblemParams& params, const DomainSpec& domain,
                                            const std::vector<int>& ns, const RefinementOptions& opts) {
  if (ns.empty()) throw ValidationError("refinement_study: empty n list");
  for (std::size_t k = 1; k < ns.size(); ++k) {
    if (ns[k] <= ns[k - 1]) throw ValidationError("refinement_study: n values must ascend");
  }
  const Regime regime = classify_regime(params);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<RefinementRow> rows;
  for (int n : ns) {
    auto grid = std::make_shared<const Grid>(build_grid(domain, n));
    const KernelWeights kw = assemble_cached(grid, params, opts.cache_dir);
    const EigenPair eig = principal_eigenpair(kw, params.p);
    RefinementRow row;
    row.n = n;
    row.lambda1 = eig.lambda1;
    row.lambda_star = nan;
    SolveReport sol;
    if (regime == Regime::Super) {
      const ThresholdReport th = detect_threshold(params, kw, opts.solve, opts.threshold, &eig);
      row.lambda_star = th.lambda_star_h;
      row.lambda_fixed = opts.lambda > 0.0 ? opts.lambda : 1.5 * th.lambda_star_h;
      sol = solve_branch_point(row.lambda_fixed, th.u_star, th.lambda_star_h, params, kw, opts.solve);
    } else {
      row.lambda_fixed = opts.lambda > 0.0 ? opts.lambda : (regime == Regime::Sub ? 1.0 : 1.2 * eig.lambda1);
      sol = solve_branch_point(row.lambda_fixed, std::nullopt, std::nullopt, params, kw, opts.solve);
    }
    row.sup_norm = sup_norm(sol.u.values());
    if (rows.empty()) {
      row.delta_lambda1 = row.delta_lambda_star = row.delta_sup = nan;
    } else {
      const RefinementRow& prev = rows.back();
      row.delta_lambda1 = std::abs(row.lambda1 - prev.lambda1) / std::abs(prev.lambda1);
      row.delta_lambda_star = std::abs(row.lambda_star - prev.lambda_star) / std::abs(prev.lambda_star);
      row.delta_sup = std::abs(row.sup_norm - prev.sup_norm) / std::abs(prev.sup_norm);
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace fraclog

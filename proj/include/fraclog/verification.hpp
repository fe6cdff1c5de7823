#pragma once

#include <string>
#include <utility>
#include <vector>

#include "fraclog/solvers.hpp"

namespace fraclog {

enum class Outcome { Pass, Fail, NotApplicable };
const char* to_string(Outcome outcome);

struct CheckResult {
  std::string name;
  Outcome outcome = Outcome::Fail;
  std::vector<std::pair<std::string, double>> witness;  // numeric evidence, in order
  std::string notes;

  bool passed() const { return outcome == Outcome::Pass; }
  bool applicable() const { return outcome != Outcome::NotApplicable; }
  double witness_value(const std::string& key) const;
};

/// u_i / d_i^s: positive minimum, and the boundary-layer minimum at least
/// hopf_frac times the median over all cells.
CheckResult check_hopf(const DiscreteFunction& u, double s, double hopf_frac = 0.1);

/// u_hi > u_lo on every cell and min (u_hi - u_lo) / d^s > 0.
CheckResult check_strict_order(const DiscreteFunction& u_hi, const DiscreteFunction& u_lo, double s);

/// Equidiffusive nonexistence for lambda <= lambda1: every random-start solve
/// collapses, and every returned u obeys
///   E(u) - lambda ||u||_p^p + ||u||_r^r >= (lambda1 - lambda) ||u||_p^p + ||u||_r^r,
/// so the tested equation <grad Phi(u), u> = 0 forces u = 0.
/// NotApplicable outside the precondition.
CheckResult check_nonexistence_equi(const ProblemParams& params, const KernelWeights& kw, double lambda,
                                    double lambda1, int trials, const SolveOptions& opts);

struct BranchSample {
  double lambda = 0.0;
  Vector u;
};

/// Sup-norm distance to target is nonincreasing along decreasing lambda and
/// the last distance is <= tol. Needs at least 3 samples.
CheckResult check_limit_branch(std::vector<BranchSample> branch, const Vector& target, double tol);

/// Solutions at lambda_k = lambda_ref (1 + gap 2^k), k = steps-1 .. 0, each
/// warm-started from the previous (larger) lambda.
std::vector<BranchSample> approach_branch(const ProblemParams& params, const KernelWeights& kw, double lambda_ref,
                                          double gap, int steps, const DiscreteFunction& start,
                                          double start_lambda, const SolveOptions& opts);

struct RefinementRow {
  int n = 0;
  double lambda1 = 0.0;
  double lambda_star = 0.0;   // NaN outside the superdiffusive regime
  double lambda_fixed = 0.0;  // lambda of the fixed-lambda solve
  double sup_norm = 0.0;      // of the fixed-lambda solution
  double delta_lambda1 = 0.0; // relative change against the previous row (NaN on the first)
  double delta_lambda_star = 0.0;
  double delta_sup = 0.0;
};

struct RefinementOptions {
  double lambda = 0.0;  // <= 0: 1 (Sub), 1.2 lambda1 (Equi), 1.5 lambda*_h (Super)
  SolveOptions solve;
  ThresholdOptions threshold;
  std::string cache_dir;
};

/// One row per n (ascending): eigenvalue, threshold, fixed-lambda sup-norm.
std::vector<RefinementRow> refinement_study(const ProblemParams& params, const DomainSpec& domain,
                                            const std::vector<int>& ns, const RefinementOptions& opts);

}  // namespace fraclog

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fraclog/eigen.hpp"
#include "fraclog/logistic.hpp"

namespace fraclog {

struct InitialGuess {
  enum class Kind { Zero, ScaledEigen, WarmStart, RandomPositive };
  Kind kind = Kind::RandomPositive;
  double tau = 1.0;  // ScaledEigen factor, RandomPositive amplitude (<= 0: automatic)
  Vector shape;      // eigenfunction for ScaledEigen, start for WarmStart

  static InitialGuess zero() { return {Kind::Zero, 0.0, {}}; }
  static InitialGuess scaled_eigen(double tau, Vector u1) { return {Kind::ScaledEigen, tau, std::move(u1)}; }
  static InitialGuess warm(Vector u) { return {Kind::WarmStart, 1.0, std::move(u)}; }
  static InitialGuess random_positive(double amplitude = 0.0) { return {Kind::RandomPositive, amplitude, {}}; }
};

struct SolveOptions {
  double residual_tol = 1e-8;
  int max_iters = 50000;
  std::uint64_t seed = 1;
  InitialGuess initial;
  double armijo_c = 1e-4;
  double shrink = 0.5;
  /// Sup-norm below which a solution counts as the trivial one.
  double collapse_tol = 1e-6;
};

void validate_solve_options(const SolveOptions& opts);

enum class SolveStatus { Converged, Collapsed, MaxIters, NotFound };
const char* to_string(SolveStatus status);

struct SolveReport {
  DiscreteFunction u;
  double energy = 0.0;
  double initial_energy = 0.0;
  double residual = 0.0;
  int iterations = 0;
  SolveStatus status = SolveStatus::MaxIters;
  double lambda = 0.0;  // 0 when not a logistic solve

  bool nontrivial() const { return status == SolveStatus::Converged; }
};

/// Builds the starting vector described by opts.initial.
Vector initial_vector(const Grid& grid, const InitialGuess& guess, double lambda, const ProblemParams& params,
                      std::uint64_t seed);

/// Projected descent on a functional whose minimizers are nonnegative.
/// Stops when the mass-weighted residual reaches opts.residual_tol
/// relative to min(1, ||L u||_M) (Converged, or Collapsed if the sup-norm is
/// below collapse_tol), or early as Collapsed once an iterate with
/// nonnegative energy has sup-norm below collapse_tol.
SolveReport minimize(const Functional& functional, const Vector& u0, const SolveOptions& opts);

/// Minimizes ||v||^p / p - sum_i v_i |C_i|, the discrete torsion problem L v = 1.
SolveReport torsion_solve(const KernelWeights& kw, double p, const SolveOptions& opts);

/// One point of a lambda branch. With a warm start converged at mu < lambda
/// the lower truncation anchored at it is minimized (the result dominates the
/// anchor); with mu >= lambda, or without a warm start, Phi_lambda itself is
/// descended from the start in opts.initial.
SolveReport solve_branch_point(double lambda, const std::optional<DiscreteFunction>& warm,
                               std::optional<double> warm_lambda, const ProblemParams& params,
                               const KernelWeights& kw, const SolveOptions& opts);

/// Largest lambda below which f_lambda(t) <= lambda1 t^{p-1} for all t > 0:
/// min over t of lambda1 t^{p-q} + t^{r-q}. Requires q > p.
double lower_bound_lambda0(const ProblemParams& params, double lambda1);

struct BranchPoint {
  double lambda = 0.0;
  double sup_norm = 0.0;
  double energy = 0.0;
  SolveStatus status = SolveStatus::MaxIters;
  Vector u;  // empty unless the point is nontrivial
};

struct ThresholdOptions {
  double lambda_high = 0.0;   // <= 0: 10 lambda_0
  double step_factor = 0.8;   // downward continuation ratio
  double bracket_tol = 1e-3;  // relative to lambda_yes
  int max_steps = 200;
};

struct ThresholdReport {
  double lambda_star_h = 0.0;  // smallest lambda found solvable
  double lambda_no = 0.0;      // largest lambda found unsolvable
  double lambda_0 = 0.0;
  double lambda1 = 0.0;
  double bracket_width = 0.0;
  DiscreteFunction u_star;
  std::vector<BranchPoint> branch;  // in evaluation order
};

/// Downward warm-started continuation from lambda_high, then bisection of
/// [lambda_no, lambda_yes] to a relative width of bracket_tol.
ThresholdReport detect_threshold(const ProblemParams& params, const KernelWeights& kw, const SolveOptions& opts,
                                 const ThresholdOptions& topts, const EigenPair* eigen = nullptr);

struct MountainPassOptions {
  int nodes = 32;
  int max_string_iters = 20000;
  double string_tol = 1e-4;   // mass-weighted gradient norm at the climbing node
  double distinct_tol = 1e-4; // required sup-norm gap to both endpoints
};

/// Second solution between 0 and u_lambda: climbing-string min-max on the
/// upper-truncated functional, then descent on the squared residual.
/// Returns status NotFound when no admissible critical point emerges.
SolveReport mountain_pass(const ProblemParams& params, double lambda, const KernelWeights& kw,
                          const SolveReport& u_lambda, const SolveOptions& opts,
                          const MountainPassOptions& mopts = {});

}  // namespace fraclog

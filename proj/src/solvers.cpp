#include "fraclog/solvers.hpp"

#include <algorithm>
#include <cmath>

#include "descent.hpp"
#include "fraclog/random.hpp"

namespace fraclog {

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::Collapsed: return "collapsed";
    case SolveStatus::MaxIters: return "max_iters";
    case SolveStatus::NotFound: return "not_found";
  }
  return "unknown";
}

void validate_solve_options(const SolveOptions& opts) {
  if (!(opts.residual_tol > 0.0)) throw ValidationError("residual_tol must be positive");
  if (!(opts.armijo_c > 0.0 && opts.armijo_c < 1.0)) throw ValidationError("armijo_c must lie in (0, 1)");
  if (!(opts.shrink > 0.0 && opts.shrink < 1.0)) throw ValidationError("shrink must lie in (0, 1)");
  if (opts.max_iters < 0) throw ValidationError("max_iters must be nonnegative");
  if (!(opts.collapse_tol > 0.0)) throw ValidationError("collapse_tol must be positive");
}

Vector initial_vector(const Grid& grid, const InitialGuess& guess, double lambda, const ProblemParams& params,
                      std::uint64_t seed) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  auto check_shape = [&](const char* what) {
    if (guess.shape.size() != n) throw ValidationError(std::string("grid mismatch: ") + what + " has wrong size");
  };
  switch (guess.kind) {
    case InitialGuess::Kind::Zero:
      return Vector::Zero(n);
    case InitialGuess::Kind::ScaledEigen:
      check_shape("eigenfunction");
      return guess.tau * guess.shape;
    case InitialGuess::Kind::WarmStart:
      check_shape("warm start");
      return guess.shape;
    case InitialGuess::Kind::RandomPositive: {
      // Default amplitude: the positive root of the reaction.
      double amplitude = guess.tau;
      if (!(amplitude > 0.0)) amplitude = lambda > 0.0 ? std::pow(lambda, 1.0 / (params.r - params.q)) : 1.0;
      Rng rng(seed);
      Vector u(n);
      for (Eigen::Index i = 0; i < n; ++i) u[i] = amplitude * rng.uniform(0.05, 1.0);
      return u;
    }
  }
  return Vector::Zero(n);
}

namespace {

detail::DescentSettings settings_from(const SolveOptions& opts) {
  detail::DescentSettings set;
  set.tol = opts.residual_tol;
  set.max_iters = opts.max_iters;
  set.armijo_c = opts.armijo_c;
  set.shrink = opts.shrink;
  return set;
}

SolveReport run_minimize(const Functional& functional, const Vector& u0, const SolveOptions& opts,
                         const detail::DescentSettings& set) {
  validate_solve_options(opts);
  const Vector& mass = functional.measure();
  if (u0.size() != mass.size()) throw ValidationError("grid mismatch: start vector has wrong size");
  const bool project = functional.nonnegative_minimizers();

  const KernelWeights& kw = functional.weights();
  const Eigen::LLT<Matrix>& stiffness = stiffness_factor(kw);

  detail::DescentProblem prob;
  prob.value = [&](const Vector& u) { return functional.value(u); };
  prob.gradient = [&](const Vector& u) { return functional.gradient(u); };
  // Gradient in the metric of the p = 2 energy, so that the spread of the
  // kernel's stiffness does not dictate the step sizes.
  prob.direction = [&](const Vector& u, const Vector& g) {
    Vector d = stiffness.solve(Vector(g.cwiseProduct(mass)));
    if (project) {
      // Components pinned at zero with an outward direction do not move.
      for (Eigen::Index i = 0; i < d.size(); ++i) {
        if (u[i] <= 0.0 && d[i] > 0.0) d[i] = 0.0;
      }
    }
    return d;
  };
  prob.metric = [&](const Vector& s) { return apply_operator(s, kw, 2.0); };
  // A step may remove at most 90% of any component, so iterates never land
  // exactly on zero, which is a critical point that projection would trap.
  if (project) {
    prob.retract = [](Vector u, const Vector& current) { return Vector(u.cwiseMax(0.1 * current.cwiseMax(0.0))); };
  }
  // Relative test: near the trivial solution an absolute residual is small
  // long before the iterate is.
  prob.residual = [&](const Vector& u, const Vector& g) {
    const double gn = detail::mass_norm(g, mass);
    if (gn == 0.0) return 0.0;
    return gn / std::max(std::min(1.0, functional.operator_norm(u, g)), 1e-300);
  };
  // Every functional here vanishes at 0 and the descent is monotone, so an
  // iterate with negative energy can never reach 0. Otherwise a small
  // iterate is declared collapsed; at a degenerate zero (lambda equal to the
  // principal eigenvalue) the approach is only algebraic.
  prob.stop = [&](const Vector& u, double value) { return value >= 0.0 && sup_norm(u) < opts.collapse_tol; };

  const auto out = detail::run_descent(prob, u0, mass, set);

  SolveReport rep;
  rep.u = DiscreteFunction(functional.weights().grid, out.u);
  rep.energy = out.value;
  rep.initial_energy = out.initial_value;
  rep.residual = detail::mass_norm(out.g, mass);
  rep.iterations = out.iterations;
  const double sup = sup_norm(out.u);
  switch (out.exit) {
    case detail::DescentExit::Converged:
      rep.status = sup < opts.collapse_tol ? SolveStatus::Collapsed : SolveStatus::Converged;
      break;
    case detail::DescentExit::Stopped:
      rep.status = SolveStatus::Collapsed;
      break;
    case detail::DescentExit::MaxIters:
    case detail::DescentExit::Stalled:
      rep.status = SolveStatus::MaxIters;
      break;
  }
  return rep;
}

}  // namespace

SolveReport minimize(const Functional& functional, const Vector& u0, const SolveOptions& opts) {
  return run_minimize(functional, u0, opts, settings_from(opts));
}

SolveReport torsion_solve(const KernelWeights& kw, double p, const SolveOptions& opts) {
  TorsionFunctional functional(kw, p);
  InitialGuess guess = opts.initial;
  if (guess.kind == InitialGuess::Kind::RandomPositive && !(guess.tau > 0.0)) guess.tau = 1.0;
  ProblemParams unused;
  const Vector u0 = initial_vector(*kw.grid, guess, 0.0, unused, opts.seed);
  return minimize(functional, u0, opts);
}

SolveReport solve_branch_point(double lambda, const std::optional<DiscreteFunction>& warm,
                               std::optional<double> warm_lambda, const ProblemParams& params,
                               const KernelWeights& kw, const SolveOptions& opts) {
  const LogisticParams lp = LogisticParams::from(params, lambda);
  LogisticFunctional phi(kw, lp);
  SolveReport rep;
  if (warm) {
    require_same_grid(*warm, kw);
    const Vector& anchor = warm->values();
    if (warm_lambda && *warm_lambda < lambda && anchor.minCoeff() > 0.0) {
      TruncatedFunctional lower(kw, TruncatedReaction(TruncationKind::Lower, anchor, lp));
      rep = minimize(lower, anchor, opts);
      const Vector& u = rep.u.values();
      const double violation = (anchor - u).maxCoeff();
      if (violation > 1e-8 * std::max(1.0, sup_norm(anchor))) {
        throw SolverError("anchor violation: solution drops below the warm start by " + std::to_string(violation));
      }
      // The truncation is inactive on u >= anchor, so report Phi_lambda itself.
      const Vector g = grad_phi(u, kw, lp);
      rep.residual = detail::mass_norm(g, kw.grid->measure);
      rep.energy = energy_phi(u, kw, lp);
      rep.initial_energy = energy_phi(anchor, kw, lp);
      if (rep.status == SolveStatus::Converged && rep.residual > opts.residual_tol) rep.status = SolveStatus::MaxIters;
    } else {
      // Descending from a supersolution: cap the per-step change so the
      // iterate cannot jump over the barrier around the nearest solution.
      auto set = settings_from(opts);
      set.max_move = 0.1;
      set.move_floor = opts.collapse_tol;
      rep = run_minimize(phi, warm->values(), opts, set);
    }
  } else {
    const Vector u0 = initial_vector(*kw.grid, opts.initial, lambda, params, opts.seed);
    rep = minimize(phi, u0, opts);
  }
  rep.lambda = lambda;
  return rep;
}

double lower_bound_lambda0(const ProblemParams& params, double lambda1) {
  const double p = params.p, q = params.q, r = params.r;
  if (!(q > p)) throw ValidationError("lower_bound_lambda0 needs the superdiffusive regime (q > p)");
  if (!(lambda1 > 0.0)) throw ValidationError("lower_bound_lambda0 needs lambda1 > 0");
  const double t = std::pow(lambda1 * (q - p) / (r - q), 1.0 / (r - p));
  return lambda1 * std::pow(t, p - q) + std::pow(t, r - q);
}

namespace {

BranchPoint to_branch_point(const SolveReport& rep) {
  BranchPoint bp;
  bp.lambda = rep.lambda;
  bp.sup_norm = sup_norm(rep.u.values());
  bp.energy = rep.energy;
  bp.status = rep.status;
  if (rep.nontrivial()) bp.u = rep.u.values();
  return bp;
}

}  // namespace

ThresholdReport detect_threshold(const ProblemParams& params, const KernelWeights& kw, const SolveOptions& opts,
                                 const ThresholdOptions& topts, const EigenPair* eigen) {
  if (classify_regime(params) != Regime::Super) {
    throw ValidationError("detect_threshold needs the superdiffusive regime (q > p)");
  }
  if (!(topts.bracket_tol > 0.0)) throw ValidationError("bracket_tol must be positive");
  if (!(topts.step_factor > 0.0 && topts.step_factor < 1.0)) throw ValidationError("step_factor must lie in (0, 1)");

  ThresholdReport out;
  out.lambda1 = eigen ? eigen->lambda1 : principal_eigenpair(kw, params.p).lambda1;
  out.lambda_0 = lower_bound_lambda0(params, out.lambda1);
  const double lambda_high = topts.lambda_high > 0.0 ? topts.lambda_high : 10.0 * out.lambda_0;

  // Constant at the reaction root: a supersolution for the exterior-zero problem.
  const auto n = static_cast<Eigen::Index>(kw.size());
  const double root = std::pow(lambda_high, 1.0 / (params.r - params.q));
  SolveReport yes = solve_branch_point(lambda_high, DiscreteFunction(kw.grid, Vector::Constant(n, root)),
                                       lambda_high, params, kw, opts);
  out.branch.push_back(to_branch_point(yes));
  if (!yes.nontrivial()) {
    throw SolverError("no solvable starting point at lambda_high = " + std::to_string(lambda_high) +
                      ", increase lambda_high");
  }

  double lambda_no = 0.0;
  bool bracketed = false;
  for (int step = 0; step < topts.max_steps; ++step) {
    const double lambda = yes.lambda * topts.step_factor;
    SolveReport trial = solve_branch_point(lambda, yes.u, yes.lambda, params, kw, opts);
    out.branch.push_back(to_branch_point(trial));
    if (trial.nontrivial()) {
      yes = std::move(trial);
    } else {
      lambda_no = lambda;
      bracketed = true;
      break;
    }
  }
  if (!bracketed) throw SolverError("detect_threshold: continuation never left the solvable range");

  while (yes.lambda - lambda_no > topts.bracket_tol * yes.lambda) {
    const double mid = 0.5 * (yes.lambda + lambda_no);
    SolveReport trial = solve_branch_point(mid, yes.u, yes.lambda, params, kw, opts);
    out.branch.push_back(to_branch_point(trial));
    if (trial.nontrivial()) {
      yes = std::move(trial);
    } else {
      lambda_no = mid;
    }
  }

  out.lambda_star_h = yes.lambda;
  out.lambda_no = lambda_no;
  out.bracket_width = yes.lambda - lambda_no;
  out.u_star = yes.u;
  if (out.lambda_star_h < out.lambda_0) {
    throw SolverError("detect_threshold: lambda*_h = " + std::to_string(out.lambda_star_h) +
                      " lies below the nonexistence bound " + std::to_string(out.lambda_0));
  }
  return out;
}

namespace {

/// Places interior nodes lo+1..hi-1 at equal arc length along the polyline.
void redistribute(std::vector<Vector>& path, std::size_t lo, std::size_t hi, const Vector& mass) {
  if (hi <= lo + 1) return;
  std::vector<double> arc(hi - lo + 1, 0.0);
  for (std::size_t k = lo + 1; k <= hi; ++k) {
    arc[k - lo] = arc[k - lo - 1] + detail::mass_norm(path[k] - path[k - 1], mass);
  }
  const double total = arc.back();
  if (!(total > 0.0)) return;
  std::vector<Vector> old(path.begin() + static_cast<std::ptrdiff_t>(lo),
                          path.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
  std::size_t seg = 0;
  for (std::size_t k = lo + 1; k < hi; ++k) {
    const double target = total * static_cast<double>(k - lo) / static_cast<double>(hi - lo);
    while (seg + 1 < arc.size() - 1 && arc[seg + 1] < target) ++seg;
    const double len = arc[seg + 1] - arc[seg];
    const double w = len > 0.0 ? (target - arc[seg]) / len : 0.0;
    path[k] = (1.0 - w) * old[seg] + w * old[seg + 1];
  }
}

/// Largest eigenvalue magnitude of the (mass-scaled) Hessian at u.
double hessian_bound(const Functional& f, const Vector& u, std::uint64_t seed) {
  Rng rng(seed);
  Vector v(u.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.uniform(0.5, 1.0);
  const Vector& mass = f.measure();
  double est = 0.0;
  for (int k = 0; k < 200; ++k) {
    v /= detail::mass_norm(v, mass);
    Vector w = f.hessian_apply(u, v);
    const double next = detail::mass_norm(w, mass);
    v = std::move(w);
    if (k > 10 && std::abs(next - est) <= 1e-6 * next) {
      est = next;
      break;
    }
    est = next;
  }
  return est;
}

}  // namespace

SolveReport mountain_pass(const ProblemParams& params, double lambda, const KernelWeights& kw,
                          const SolveReport& u_lambda, const SolveOptions& opts, const MountainPassOptions& mopts) {
  validate_solve_options(opts);
  if (mopts.nodes < 3) throw ValidationError("mountain_pass needs at least 3 path nodes");
  if (!u_lambda.nontrivial()) throw ValidationError("mountain_pass needs a converged nontrivial u_lambda");
  require_same_grid(u_lambda.u, kw);
  const LogisticParams lp = LogisticParams::from(params, lambda);
  const Vector& top = u_lambda.u.values();
  const Vector& mass = kw.grid->measure;
  TruncatedFunctional upper(kw, TruncatedReaction(TruncationKind::Upper, top, lp));

  // Climbing string between the two local minimizers 0 and u_lambda.
  const auto m = static_cast<std::size_t>(mopts.nodes);
  std::vector<Vector> path(m);
  for (std::size_t k = 0; k < m; ++k) path[k] = (static_cast<double>(k) / static_cast<double>(m - 1)) * top;
  const double step = 0.5 / hessian_bound(upper, top, opts.seed);

  std::size_t climber = 1;
  double climb_residual = 0.0;
  int iters = 0;
  std::vector<double> energy(m);
  std::vector<Vector> grad(m);
  for (; iters < mopts.max_string_iters; ++iters) {
    for (std::size_t k = 1; k + 1 < m; ++k) {
      energy[k] = upper.value(path[k]);
      grad[k] = upper.gradient(path[k]);
    }
    climber = 1;
    for (std::size_t k = 2; k + 1 < m; ++k) {
      if (energy[k] > energy[climber]) climber = k;
    }
    climb_residual = detail::mass_norm(grad[climber], mass);
    if (climb_residual <= mopts.string_tol) break;
    for (std::size_t k = 1; k + 1 < m; ++k) {
      if (k == climber) {
        Vector tangent = path[k + 1] - path[k - 1];
        tangent /= detail::mass_norm(tangent, mass);
        const double along = detail::mass_dot(grad[k], tangent, mass);
        path[k] -= step * (grad[k] - 2.0 * along * tangent);
      } else {
        path[k] -= step * grad[k];
      }
    }
    redistribute(path, 0, climber, mass);
    redistribute(path, climber, m - 1, mass);
  }

  // Polish: descend 0.5 |g|_M^2, whose mass-scaled gradient is J g.
  detail::DescentProblem prob;
  prob.value = [&](const Vector& u) {
    const Vector g = upper.gradient(u);
    return 0.5 * detail::mass_dot(g, g, mass);
  };
  prob.gradient = [&](const Vector& u) { return upper.hessian_apply(u, upper.gradient(u)); };
  prob.residual = [&](const Vector& u, const Vector&) { return detail::mass_norm(upper.gradient(u), mass); };
  auto set = settings_from(opts);
  const auto polished = detail::run_descent(prob, path[climber], mass, set);

  SolveReport rep;
  rep.lambda = lambda;
  const Vector& v = polished.u;
  rep.u = DiscreteFunction(kw.grid, v);
  rep.energy = energy_phi(v, kw, lp);
  rep.initial_energy = energy[climber];
  rep.residual = detail::mass_norm(grad_phi(v, kw, lp), mass);
  rep.iterations = iters + polished.iterations;

  const double scale = sup_norm(top);
  const double slack = 1e-10 * scale;
  const bool ordered = v.minCoeff() >= -slack && (v - top).maxCoeff() <= slack;
  const bool distinct = sup_norm(v) > mopts.distinct_tol && sup_norm(top - v) > mopts.distinct_tol;
  const bool solved = rep.residual <= opts.residual_tol;
  if (ordered && distinct && solved) {
    rep.status = SolveStatus::Converged;
  } else if (!solved && ordered && distinct) {
    rep.status = SolveStatus::MaxIters;
  } else {
    rep.status = SolveStatus::NotFound;
  }
  return rep;
}

}  // namespace fraclog

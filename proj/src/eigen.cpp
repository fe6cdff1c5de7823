#include "fraclog/eigen.hpp"

#include <algorithm>
#include <cmath>

#include "descent.hpp"
#include "fraclog/random.hpp"

namespace fraclog {

double rayleigh_quotient(const Vector& u, const KernelWeights& kw, double p) {
  const double norm = lp_norm(u, kw.grid->measure, p);
  if (!(norm > 0.0)) throw ValidationError("rayleigh_quotient: zero function");
  return gagliardo_energy(u, kw, p) / std::pow(norm, p);
}

double rayleigh_quotient(const DiscreteFunction& u, const KernelWeights& kw, double p) {
  require_same_grid(u, kw);
  return rayleigh_quotient(u.values(), kw, p);
}

namespace {

Vector signed_power_vec(const Vector& u, double nu) {
  return u.unaryExpr([nu](double a) { return signed_power(a, nu); });
}

struct RestartResult {
  Vector u;
  double lambda = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

RestartResult run_restart(const KernelWeights& kw, double p, Vector start, const EigenOptions& opts, double tol) {
  const Vector& mass = kw.grid->measure;
  detail::DescentProblem prob;
  prob.value = [&](const Vector& u) { return rayleigh_quotient(u, kw, p); };
  // On the unit sphere the mass-scaled gradient of the quotient is p (L u - R u^{p-1}).
  prob.gradient = [&](const Vector& u) {
    const double rq = rayleigh_quotient(u, kw, p);
    return Vector(p * (apply_operator(u, kw, p) - rq * signed_power_vec(u, p - 1.0)));
  };
  prob.retract = [&](Vector u, const Vector&) {
    const double norm = lp_norm(u, mass, p);
    if (norm > 0.0) u /= norm;
    return u;
  };
  prob.residual = [&](const Vector&, const Vector& g) { return detail::mass_norm(g, mass) / p; };

  detail::DescentSettings set;
  set.tol = tol;
  set.max_iters = opts.max_iters;
  const auto out = detail::run_descent(prob, std::move(start), mass, set);

  RestartResult r;
  r.u = out.u;
  r.lambda = out.value;
  r.residual = out.residual;
  r.iterations = out.iterations;
  r.converged = out.exit == detail::DescentExit::Converged;
  return r;
}

}  // namespace

EigenPair principal_eigenpair(const KernelWeights& kw, double p, const EigenOptions& opts) {
  if (!kw.grid) throw ValidationError("principal_eigenpair: weights without grid");
  if (opts.restarts < 1) throw ValidationError("principal_eigenpair: need at least one restart");
  const double tol = opts.tol > 0.0 ? opts.tol : (p == 2.0 ? 1e-8 : 1e-6);
  const Grid& grid = *kw.grid;
  const auto n = static_cast<Eigen::Index>(grid.size());
  const double s = kw.s;

  Rng rng(opts.seed);
  std::vector<RestartResult> results;
  for (int k = 0; k < opts.restarts; ++k) {
    Vector start(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double shape = std::pow(grid.dist[i], s);
      start[i] = k == 0 ? shape : shape * rng.uniform(0.1, 1.0);
    }
    results.push_back(run_restart(kw, p, std::move(start), opts, tol));
  }

  EigenPair out;
  int best = -1;
  double lo = 0.0, hi = 0.0;
  double last_residual = 0.0;
  for (int k = 0; k < static_cast<int>(results.size()); ++k) {
    auto& r = results[static_cast<std::size_t>(k)];
    last_residual = r.residual;
    if (!r.converged) continue;
    if (r.u.sum() < 0.0) r.u = -r.u;
    const double scale = sup_norm(r.u);
    if (r.u.minCoeff() <= 1e-12 * scale) {
      ++out.discarded_restarts;
      continue;
    }
    ++out.accepted_restarts;
    if (best < 0) {
      lo = hi = r.lambda;
    } else {
      lo = std::min(lo, r.lambda);
      hi = std::max(hi, r.lambda);
    }
    if (best < 0 || r.lambda < results[static_cast<std::size_t>(best)].lambda) best = k;
  }
  if (best < 0) {
    throw SolverError("principal_eigenpair: no restart converged to a positive eigenfunction (last residual " +
                      std::to_string(last_residual) + ")");
  }
  const auto& r = results[static_cast<std::size_t>(best)];
  out.lambda1 = r.lambda;
  out.u1 = DiscreteFunction(kw.grid, r.u);
  out.residual = r.residual;
  out.iterations = r.iterations;
  out.restarts_agreement = (hi - lo) / lo;
  return out;
}

}  // namespace fraclog

#pragma once

// Projected gradient descent with two-point (Barzilai-Borwein) steps and an
// Armijo backtracking safeguard. Shared by the eigen solver and the
// variational solvers. Vectors are compared in the mass-weighted inner
// product <a, b>_M = sum_i a_i b_i |C_i|.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "fraclog/problem.hpp"

namespace fraclog::detail {

inline double mass_dot(const Vector& a, const Vector& b, const Vector& m) { return a.cwiseProduct(b).dot(m); }
inline double mass_norm(const Vector& a, const Vector& m) { return std::sqrt(mass_dot(a, a, m)); }

struct DescentProblem {
  std::function<double(const Vector&)> value;
  /// Mass-scaled gradient.
  std::function<Vector(const Vector&)> gradient;
  /// Maps a trial point back to the feasible set given the current point
  /// (identity if unset).
  std::function<Vector(Vector, const Vector&)> retract;
  /// Stationarity measure at (u, g); the run stops once it is <= tol.
  std::function<double(const Vector&, const Vector&)> residual;
  /// Direction that is descended; defaults to g.
  std::function<Vector(const Vector&, const Vector&)> direction;
  /// P s for the metric the direction is a gradient in (identity if unset);
  /// used by the two-point step.
  std::function<Vector(const Vector&)> metric;
  /// Optional early exit on (u, value), checked after every accepted step.
  std::function<bool(const Vector&, double)> stop;
};

struct DescentSettings {
  double tol = 1e-8;
  int max_iters = 50000;
  double armijo_c = 1e-4;
  double shrink = 0.5;
  double initial_step = 0.0;  // <= 0: chosen from the first gradient
  double min_step = 1e-14;
  double max_step = 1e14;
  /// If positive, caps each step so that max_i |u_new - u|_i <= max_move * max(sup|u|, move_floor).
  double max_move = 0.0;
  double move_floor = 0.0;
};

enum class DescentExit { Converged, Stopped, MaxIters, Stalled };

struct DescentResult {
  Vector u;
  Vector g;
  double value = 0.0;
  double initial_value = 0.0;
  double residual = 0.0;
  int iterations = 0;
  DescentExit exit = DescentExit::MaxIters;
};

inline DescentResult run_descent(const DescentProblem& prob, Vector u, const Vector& mass,
                                 const DescentSettings& set) {
  DescentResult res;
  if (prob.retract) {
    const Vector start = u;
    u = prob.retract(std::move(u), start);
  }
  double value = prob.value(u);
  if (!std::isfinite(value)) throw SolverError("non-finite energy at the initial point");
  Vector g = prob.gradient(u);
  res.initial_value = value;
  auto direction = [&](const Vector& x, const Vector& gx) { return prob.direction ? prob.direction(x, gx) : gx; };

  Vector d = direction(u, g);
  double dn = mass_norm(d, mass);
  double step = set.initial_step > 0.0 ? set.initial_step : (dn > 0.0 ? std::min(1.0, 1.0 / dn) : 1.0);
  int stalls = 0;
  int it = 0;
  for (;; ++it) {
    res.residual = prob.residual(u, g);
    if (!std::isfinite(res.residual)) throw SolverError("non-finite gradient during descent");
    if (res.residual <= set.tol) {
      res.exit = DescentExit::Converged;
      break;
    }
    if (it >= set.max_iters) {
      res.exit = DescentExit::MaxIters;
      break;
    }
    step = std::clamp(step, set.min_step, set.max_step);
    if (set.max_move > 0.0) {
      const double dmax = d.cwiseAbs().maxCoeff();
      const double umax = std::max(u.cwiseAbs().maxCoeff(), set.move_floor);
      if (dmax > 0.0) step = std::min(step, set.max_move * umax / dmax);
    }
    bool accepted = false;
    Vector u_new, g_new;
    double value_new = 0.0;
    for (int bt = 0; bt < 60; ++bt) {
      u_new = u - step * d;
      if (prob.retract) u_new = prob.retract(std::move(u_new), u);
      value_new = prob.value(u_new);
      if (!std::isfinite(value_new)) {
        step *= set.shrink;
        continue;
      }
      const Vector delta = u_new - u;
      const double slope = mass_dot(g, delta, mass);  // < 0 for a descent step
      if (value_new <= value + set.armijo_c * slope) {
        g_new = prob.gradient(u_new);
        accepted = true;
        break;
      }
      // Below round-off the energy cannot resolve the decrease; fall back to
      // the derivative form of the sufficient-decrease test.
      const double noise = 64.0 * std::numeric_limits<double>::epsilon() * (std::abs(value) + std::abs(value_new));
      if (value_new <= value + noise && slope < 0.0) {
        g_new = prob.gradient(u_new);
        if (mass_dot(g_new, delta, mass) <= (1.0 - 2.0 * set.armijo_c) * (-slope)) {
          accepted = true;
          break;
        }
      }
      step *= set.shrink;
      if (step < set.min_step) break;
    }
    if (!accepted) {
      // Restart from a small steepest-descent step; give up after repeated failures.
      if (++stalls > 3) {
        res.exit = DescentExit::Stalled;
        break;
      }
      step = 1.0 / std::max(mass_norm(d, mass), 1e-300) * 1e-6;
      continue;
    }
    stalls = 0;
    const Vector s = u_new - u;
    Vector d_new = direction(u_new, g_new);
    const Vector yg = g_new - g;
    const Vector yd = d_new - d;
    const double sy = mass_dot(s, yg, mass);
    // Alternate the two BB formulas; fall back to growth if curvature is not positive.
    if (sy > 0.0) {
      const double sps = prob.metric ? mass_dot(s, prob.metric(s), mass) : mass_dot(s, s, mass);
      const double yy = mass_dot(yg, yd, mass);
      step = (it % 2 == 0 || !(yy > 0.0)) ? sps / sy : sy / yy;
    } else {
      step *= 4.0;
    }
    u = std::move(u_new);
    g = std::move(g_new);
    d = std::move(d_new);
    value = value_new;
    if (prob.stop && prob.stop(u, value)) {
      res.residual = prob.residual(u, g);
      res.exit = DescentExit::Stopped;
      ++it;
      break;
    }
  }
  res.u = std::move(u);
  res.g = std::move(g);
  res.value = value;
  res.iterations = it;
  return res;
}

}  // namespace fraclog::detail

#pragma once

#include <cmath>
#include <span>
#include <utility>
#include <vector>

namespace fraclog::quad {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussRule make_gauss_rule(int order);

template <int Order>
const GaussRule& gauss_rule() {
  static const GaussRule rule = make_gauss_rule(Order);
  return rule;
}

/// Fixed-order rule mapped to [a, b].
template <int Order = 20, typename F>
double gauss(F&& f, double a, double b) {
  const GaussRule& rule = gauss_rule<Order>();
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) sum += rule.weights[k] * f(mid + half * rule.nodes[k]);
  return sum * half;
}

/// Tensor-product rule on [a0,b0] x [a1,b1].
template <int Order = 10, typename F>
double gauss2(F&& f, double a0, double b0, double a1, double b1) {
  const GaussRule& rule = gauss_rule<Order>();
  const double m0 = 0.5 * (a0 + b0), h0 = 0.5 * (b0 - a0);
  const double m1 = 0.5 * (a1 + b1), h1 = 0.5 * (b1 - a1);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double x = m0 + h0 * rule.nodes[i];
    double row = 0.0;
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) row += rule.weights[j] * f(x, m1 + h1 * rule.nodes[j]);
    sum += rule.weights[i] * row;
  }
  return sum * h0 * h1;
}

/// Adaptive 1D Gauss-Legendre: bisects until a panel and its halves agree.
/// Returns {value, converged}.
template <typename F>
std::pair<double, bool> adaptive_gauss(F&& f, double a, double b, double rel_tol, int max_depth = 30) {
  struct Worker {
    F& f;
    double rel_tol;
    bool ok = true;
    double run(double lo, double hi, double whole, int depth) {
      const double mid = 0.5 * (lo + hi);
      const double left = gauss(f, lo, mid);
      const double right = gauss(f, mid, hi);
      const double refined = left + right;
      if (std::abs(refined - whole) <= rel_tol * std::abs(refined) || std::abs(refined - whole) < 1e-300) {
        return refined;
      }
      if (depth <= 0) {
        ok = false;
        return refined;
      }
      return run(lo, mid, left, depth - 1) + run(mid, hi, right, depth - 1);
    }
  };
  Worker w{f, rel_tol};
  const double value = w.run(a, b, gauss(f, a, b), max_depth);
  return {value, w.ok};
}

/// Adaptive tensor Gauss-Legendre over a box: quadrisects until the parent
/// estimate and the sum of its children agree. Returns {value, converged}.
template <typename F>
std::pair<double, bool> adaptive_gauss2(F&& f, double a0, double b0, double a1, double b1, double rel_tol,
                                        int max_depth = 24) {
  struct Worker {
    F& f;
    double rel_tol;
    bool ok = true;
    double run(double x0, double x1, double y0, double y1, double whole, int depth) {
      const double xm = 0.5 * (x0 + x1), ym = 0.5 * (y0 + y1);
      const double q00 = gauss2(f, x0, xm, y0, ym);
      const double q10 = gauss2(f, xm, x1, y0, ym);
      const double q01 = gauss2(f, x0, xm, ym, y1);
      const double q11 = gauss2(f, xm, x1, ym, y1);
      const double refined = q00 + q10 + q01 + q11;
      const double err = std::abs(refined - whole);
      if (err <= rel_tol * std::abs(refined) || err < 1e-300) return refined;
      if (depth <= 0) {
        ok = false;
        return refined;
      }
      return run(x0, xm, y0, ym, q00, depth - 1) + run(xm, x1, y0, ym, q10, depth - 1) +
             run(x0, xm, ym, y1, q01, depth - 1) + run(xm, x1, ym, y1, q11, depth - 1);
    }
  };
  Worker w{f, rel_tol};
  const double value = w.run(a0, b0, a1, b1, gauss2(f, a0, b0, a1, b1), max_depth);
  return {value, w.ok};
}

}  // namespace fraclog::quad

#pragma once

// Independent oracles for the tests. Nothing here calls the library's
// closed forms or quadrature: 1D weights use Boost's double-exponential
// rules, 2D weights plain Monte-Carlo, eigenvalues a dense generalized
// eigensolve built straight from W and V.

#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <utility>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <Eigen/Eigenvalues>

#include "fraclog/kernel.hpp"
#include "fraclog/problem.hpp"

namespace oracle {

using fraclog::Interval;
using fraclog::Rect;

// Distances to the left and right ends of [a, b] recovered from the
// complement argument, so values next to an endpoint keep full precision.
inline double from_left(double x, double xc, double a) { return xc < 0 ? -xc : x - a; }
inline double from_right(double x, double xc, double b) { return xc > 0 ? xc : b - x; }

/// Double integral of |x - y|^{-beta} over a x b, a and b disjoint.
inline double pair_1d(Interval a, Interval b, double beta) {
  if (a.lo > b.lo) std::swap(a, b);
  const double gap = b.lo - a.hi, wb = b.length();
  boost::math::quadrature::tanh_sinh<double> ts(15);
  // Inner integral over t = y - b.lo. The integrand peaks on the scale of
  // d0 = gap + xb, so [0, wb] is cut where the distance grows 8-fold.
  auto inner = [&](double xb) {
    const double d0 = gap + xb;
    double sum = 0.0, lo = 0.0;
    for (double hi = 7 * d0;; hi = 8 * (hi + d0) - d0) {
      const double top = std::min(hi, wb);
      sum += ts.integrate([&](double t) { return std::pow(d0 + t, -beta); }, lo, top, 1e-14);
      lo = top;
      if (top >= wb) break;
    }
    return sum;
  };
  // For touching cells the inner integral grows like xb^{1-beta}; the sliver
  // xb < 1e-150 contributes below 1e-14 relative for beta <= 1.9 and would
  // overflow the integrand, so it is dropped.
  return ts.integrate(
      [&](double x, double xc) {
        const double xb = from_right(x, xc, a.hi);
        return gap + xb < 1e-150 ? 0.0 : inner(xb);
      },
      a.lo, a.hi, 1e-13);
}

/// Double integral of |x - y|^{-beta} over cell x (R minus domain).
inline double exterior_1d(Interval cell, Interval domain, double beta) {
  boost::math::quadrature::tanh_sinh<double> ts(15);
  boost::math::quadrature::exp_sinh<double> es;
  // Tail integral over y beyond an endpoint at distance d from x.
  auto tail = [&](double d) {
    return es.integrate([&](double t) { return d + t > 0 ? std::pow(d + t, -beta) : 0.0; }, 1e-14);
  };
  return ts.integrate(
      [&](double x, double xc) {
        const double left = cell.lo == domain.lo ? from_left(x, xc, cell.lo) : x - domain.lo;
        const double right = cell.hi == domain.hi ? from_right(x, xc, cell.hi) : domain.hi - x;
        return std::min(left, right) < 1e-150 ? 0.0 : tail(left) + tail(right);
      },
      cell.lo, cell.hi, 1e-13);
}

struct Estimate {
  double mean = 0.0;
  double se = 0.0;
};

/// Monte-Carlo estimate of the 2D pair weight for separated rectangles.
inline Estimate mc_pair_2d(const Rect& a, const Rect& b, double ps, long samples, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double area = a.x.length() * a.y.length() * b.x.length() * b.y.length();
  double sum = 0.0, sum2 = 0.0;
  for (long k = 0; k < samples; ++k) {
    const double x0 = a.x.lo + a.x.length() * u01(gen), x1 = a.y.lo + a.y.length() * u01(gen);
    const double y0 = b.x.lo + b.x.length() * u01(gen), y1 = b.y.lo + b.y.length() * u01(gen);
    const double f = std::pow(std::hypot(x0 - y0, x1 - y1), -(2.0 + ps));
    sum += f;
    sum2 += f * f;
  }
  const double n = static_cast<double>(samples);
  const double mean = sum / n;
  const double var = std::max(0.0, sum2 / n - mean * mean);
  return {area * mean, area * std::sqrt(var / n)};
}

/// Monte-Carlo estimate of the 2D exterior weight. Along each ray from x the
/// radial integral beyond the exit distance rho is rho^{-ps} / ps, so only
/// the start point and the direction are sampled.
inline Estimate mc_exterior_2d(const Rect& cell, const Rect& domain, double ps, long samples, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double area = cell.x.length() * cell.y.length();
  double sum = 0.0, sum2 = 0.0;
  for (long k = 0; k < samples; ++k) {
    const double x0 = cell.x.lo + cell.x.length() * u01(gen), x1 = cell.y.lo + cell.y.length() * u01(gen);
    const double th = 2.0 * M_PI * u01(gen);
    const double c = std::cos(th), s = std::sin(th);
    double rho = std::numeric_limits<double>::infinity();
    if (c > 0) rho = std::min(rho, (domain.x.hi - x0) / c);
    if (c < 0) rho = std::min(rho, (domain.x.lo - x0) / c);
    if (s > 0) rho = std::min(rho, (domain.y.hi - x1) / s);
    if (s < 0) rho = std::min(rho, (domain.y.lo - x1) / s);
    const double f = std::pow(rho, -ps) / ps;
    sum += f;
    sum2 += f * f;
  }
  const double n = static_cast<double>(samples);
  const double mean = sum / n;
  const double var = std::max(0.0, sum2 / n - mean * mean);
  const double scale = area * 2.0 * M_PI;
  return {scale * mean, scale * std::sqrt(var / n)};
}

/// Smallest eigenvalue of A u = lambda M u with A the p = 2 quadratic form
/// assembled from W and V directly, M = diag(|C_i|).
inline double dense_lambda1(const fraclog::KernelWeights& kw) {
  const auto n = kw.W.rows();
  Eigen::MatrixXd A = -2.0 * kw.W;
  for (Eigen::Index i = 0; i < n; ++i) {
    long double row = 0;
    for (Eigen::Index j = 0; j < n; ++j) row += kw.W(i, j);
    A(i, i) = 2.0 * static_cast<double>(row + kw.V[i]);
  }
  Eigen::MatrixXd M = kw.grid->measure.asDiagonal();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, M, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

/// Extended-precision energy sum_{i != j} W_ij |u_i - u_j|^p + 2 sum V_i |u_i|^p.
inline double energy(const Eigen::VectorXd& u, const fraclog::KernelWeights& kw, double p) {
  long double e = 0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    for (Eigen::Index j = 0; j < u.size(); ++j) {
      if (i != j) e += static_cast<long double>(kw.W(i, j)) * std::pow(std::abs(static_cast<long double>(u[i]) - u[j]), p);
    }
    e += 2.0L * kw.V[i] * std::pow(std::abs(static_cast<long double>(u[i])), p);
  }
  return static_cast<double>(e);
}

inline std::shared_ptr<const fraclog::Grid> interval_grid(int n, double a = 0.0, double b = 1.0) {
  return std::make_shared<const fraclog::Grid>(fraclog::build_grid(fraclog::DomainSpec::interval(a, b), n));
}

inline fraclog::ProblemParams params(double s, double p, double q, double r, int dim = 1) {
  fraclog::ProblemParams pp;
  pp.dim = dim;
  pp.s = s;
  pp.p = p;
  pp.q = q;
  pp.r = r;
  return fraclog::validate_params(pp);
}

inline fraclog::KernelWeights weights_1d(int n, double s, double p, double a = 0.0, double b = 1.0) {
  const double q = p, r = p + 1.0;
  return fraclog::assemble(interval_grid(n, a, b), params(s, p, q, r));
}

}  // namespace oracle

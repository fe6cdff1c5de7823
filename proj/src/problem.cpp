#include "fraclog/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fraclog {

const char* to_string(Regime regime) {
  switch (regime) {
    case Regime::Sub:
      return "sub";
    case Regime::Equi:
      return "equi";
    case Regime::Super:
      return "super";
  }
  return "?";
}

namespace {

[[noreturn]] void reject(const std::string& what) {
  throw ValidationError("invalid parameters: " + what);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

ProblemParams validate_params(const ProblemParams& raw) {
  ProblemParams out = raw;
  if (raw.dim != 1 && raw.dim != 2) reject("dim must be 1 or 2 (got " + std::to_string(raw.dim) + ")");
  if (!std::isfinite(raw.s) || !(raw.s > 0.0 && raw.s < 1.0)) reject("s must lie in (0,1) (got " + fmt(raw.s) + ")");
  if (!std::isfinite(raw.p) || raw.p < 2.0) reject("p must be >= 2 (got " + fmt(raw.p) + ")");
  const double ps = raw.p * raw.s;
  if (ps >= raw.dim) reject("ps >= N (ps = " + fmt(ps) + ", N = " + std::to_string(raw.dim) + ")");
  out.p_star = raw.dim * raw.p / (raw.dim - ps);
  if (!std::isfinite(raw.q) || !(raw.q > 1.0)) reject("q must be > 1 (got " + fmt(raw.q) + ")");
  if (!std::isfinite(raw.r) || !(raw.r > raw.q)) reject("r must be > q (got q = " + fmt(raw.q) + ", r = " + fmt(raw.r) + ")");
  if (!(raw.r < out.p_star)) reject("r must be < p_star = " + fmt(out.p_star) + " (got r = " + fmt(raw.r) + ")");
  return out;
}

Regime classify_regime(const ProblemParams& params) {
  if (params.q < params.p) return Regime::Sub;
  if (params.q > params.p) return Regime::Super;
  return Regime::Equi;
}

DomainSpec DomainSpec::interval(double a, double b) {
  DomainSpec d;
  d.dim = 1;
  d.lo = {a, 0.0};
  d.hi = {b, 0.0};
  return d;
}

DomainSpec DomainSpec::rectangle(double x0, double x1, double y0, double y1) {
  DomainSpec d;
  d.dim = 2;
  d.lo = {x0, y0};
  d.hi = {x1, y1};
  return d;
}

double DomainSpec::measure() const {
  return dim == 1 ? length(0) : length(0) * length(1);
}

double DomainSpec::diameter() const {
  return dim == 1 ? length(0) : std::hypot(length(0), length(1));
}

void validate_domain(const DomainSpec& domain) {
  if (domain.dim != 1 && domain.dim != 2) throw ValidationError("domain dimension must be 1 or 2");
  for (int a = 0; a < domain.dim; ++a) {
    if (!std::isfinite(domain.lo[a]) || !std::isfinite(domain.hi[a]) || !(domain.hi[a] > domain.lo[a])) {
      throw ValidationError("domain must have nonempty interior (axis " + std::to_string(a) + ")");
    }
  }
}

double Grid::cell_lo(std::size_t i, int axis) const {
  const auto idx = index2(i);
  return domain.lo[axis] + idx[axis] * h[axis];
}

bool Grid::touches_boundary(std::size_t i) const {
  const auto idx = index2(i);
  for (int a = 0; a < dim(); ++a) {
    if (idx[a] == 0 || idx[a] == n - 1) return true;
  }
  return false;
}

Grid build_grid(const DomainSpec& domain, int n) {
  validate_domain(domain);
  if (n < 1) throw ValidationError("grid.n must be >= 1 (got " + std::to_string(n) + ")");
  Grid g;
  g.domain = domain;
  g.n = n;
  const int d = domain.dim;
  for (int a = 0; a < d; ++a) g.h[a] = domain.length(a) / n;
  const std::size_t count = d == 1 ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n) * n;
  g.centers.resize(count);
  g.measure.resize(static_cast<Eigen::Index>(count));
  g.dist.resize(static_cast<Eigen::Index>(count));
  const double cell_measure = d == 1 ? g.h[0] : g.h[0] * g.h[1];
  for (std::size_t i = 0; i < count; ++i) {
    const auto idx = g.index2(i);
    double dmin = std::numeric_limits<double>::infinity();
    for (int a = 0; a < d; ++a) {
      // Center from both ends so mirror cells get bitwise mirror distances.
      const double from_lo = (idx[a] + 0.5) * g.h[a];
      const double from_hi = (n - idx[a] - 0.5) * g.h[a];
      g.centers[i][a] = domain.lo[a] + from_lo;
      dmin = std::min({dmin, from_lo, from_hi});
    }
    if (d == 1) g.centers[i][1] = 0.0;
    g.measure[static_cast<Eigen::Index>(i)] = cell_measure;
    g.dist[static_cast<Eigen::Index>(i)] = dmin;
  }
  return g;
}

}  // namespace fraclog

#include "fraclog/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>
#include <vector>

#include "fraclog/parallel.hpp"
#include "fraclog/quadrature.hpp"

namespace fraclog {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kQuadTol = 1e-12;

/// (x0 + dx)^g - x0^g without cancellation when dx << x0.
double pow_step(double x0, double dx, double g) {
  if (x0 <= 0.0) return std::pow(dx, g);
  return std::pow(x0, g) * std::expm1(g * std::log1p(dx / x0));
}

/// x0^g * ((1 + delta/x0)^g - 1); delta = -x0 gives -x0^g.
double pow_rel(double x0, double delta, double g) {
  return std::pow(x0, g) * std::expm1(g * std::log1p(delta / x0));
}

double cos_power_integral(double a, double phi) {
  // int_0^phi cos^a = int_0^{sin phi} (1 - u^2)^{(a-1)/2} du, binomial series
  const double u = std::sin(phi);
  const double u2 = u * u;
  const double m = 0.5 * (a - 1.0);
  double coeff = 1.0;
  double upow = u;
  double sum = 0.0;
  for (int k = 0; k < 400; ++k) {
    const double term = coeff * upow / (2.0 * k + 1.0);
    sum += term;
    if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
    coeff *= -(m - k) / (k + 1.0);
    upow *= u2;
  }
  return sum;
}

double full_sine_power_integral(double a) {
  return 0.5 * std::sqrt(kPi) * std::tgamma(0.5 * (a + 1.0)) / std::tgamma(0.5 * a + 1.0);
}

std::string describe(const Rect& r) {
  std::ostringstream os;
  os.precision(17);
  os << "[" << r.x.lo << "," << r.x.hi << "]x[" << r.y.lo << "," << r.y.hi << "]";
  return os.str();
}

// phi(z) = alpha + beta z on [lo, hi]: length of {x in A : x + z in B}.
struct Piece {
  double lo, hi, alpha, beta;
};

std::vector<Piece> overlap_pieces(Interval a, Interval b) {
  std::vector<double> br{b.lo - a.hi, b.lo - a.lo, b.hi - a.hi, b.hi - a.lo};
  const double zmin = b.lo - a.hi, zmax = b.hi - a.lo;
  if (zmin < 0.0 && 0.0 < zmax) br.push_back(0.0);
  std::sort(br.begin(), br.end());
  br.erase(std::unique(br.begin(), br.end()), br.end());
  std::vector<Piece> out;
  for (std::size_t k = 0; k + 1 < br.size(); ++k) {
    const double z0 = br[k], z1 = br[k + 1];
    if (!(z1 > z0)) continue;
    const double zm = 0.5 * (z0 + z1);
    double up_a, up_b, low_a, low_b;
    if (a.hi <= b.hi - zm) {
      up_a = a.hi;
      up_b = 0.0;
    } else {
      up_a = b.hi;
      up_b = -1.0;
    }
    if (a.lo >= b.lo - zm) {
      low_a = a.lo;
      low_b = 0.0;
    } else {
      low_a = b.lo;
      low_b = -1.0;
    }
    const Piece piece{z0, z1, up_a - low_a, up_b - low_b};
    if (piece.alpha + piece.beta * zm > 0.0) out.push_back(piece);
  }
  return out;
}

// Bilinear weight c00 + c10 z1 + c01 z2 + c11 z1 z2.
struct Bilinear {
  double c00, c10, c01, c11;
  double operator()(double z1, double z2) const { return c00 + c10 * z1 + c01 * z2 + c11 * z1 * z2; }
};

/// int over [0,X]x[0,Y] of |z|^{-(2+ps)} P(z), P(0) = 0: radial part exact.
double polar_corner_integral(double X, double Y, const Bilinear& P, double ps, bool& ok) {
  const double e1 = 1.0 - ps, e2 = 2.0 - ps;
  auto integrand = [&](double theta, double R) {
    const double c = std::cos(theta), s = std::sin(theta);
    return (P.c10 * c + P.c01 * s) * std::pow(R, e1) / e1 + P.c11 * c * s * std::pow(R, e2) / e2;
  };
  const double theta_c = std::atan2(Y, X);
  auto lower = [&](double t) { return integrand(t, X / std::cos(t)); };
  auto upper = [&](double t) { return integrand(t, Y / std::sin(t)); };
  const auto [v1, ok1] = quad::adaptive_gauss(lower, 0.0, theta_c, 1e-13);
  const auto [v2, ok2] = quad::adaptive_gauss(upper, theta_c, 0.5 * kPi, 1e-13);
  ok = ok && ok1 && ok2;
  return v1 + v2;
}

double pair_weight_2d_impl(const Rect& a, const Rect& b, double ps) {
  if (!(ps > 0.0 && ps < 1.0)) {
    throw ValidationError("pair_weight_2d: piecewise-constant cells need 0 < ps < 1 (got ps = " + std::to_string(ps) + ")");
  }
  const double alpha = 2.0 + ps;
  const auto px = overlap_pieces(a.x, b.x);
  const auto py = overlap_pieces(a.y, b.y);
  const double scale = std::max({a.x.length(), a.y.length(), b.x.length(), b.y.length()});
  bool ok = true;
  double total = 0.0;
  for (const Piece& u : px) {
    for (const Piece& w : py) {
      Bilinear P{u.alpha * w.alpha, u.beta * w.alpha, u.alpha * w.beta, u.beta * w.beta};
      const bool origin_x = u.lo <= 0.0 && 0.0 <= u.hi;
      const bool origin_y = w.lo <= 0.0 && 0.0 <= w.hi;
      if (origin_x && origin_y) {
        // Origin is a corner of this box (0 is always a breakpoint).
        double X = u.hi, Y = w.hi;
        if (u.hi <= 0.0) {
          X = -u.lo;
          P.c10 = -P.c10;
          P.c11 = -P.c11;
        }
        if (w.hi <= 0.0) {
          Y = -w.lo;
          P.c01 = -P.c01;
          P.c11 = -P.c11;
        }
        if (std::abs(P.c00) > 1e-12 * scale * scale) {
          throw ValidationError("pair_weight_2d: overlapping cells " + describe(a) + " and " + describe(b));
        }
        P.c00 = 0.0;
        total += polar_corner_integral(X, Y, P, ps, ok);
      } else {
        auto f = [&](double z1, double z2) { return std::pow(z1 * z1 + z2 * z2, -0.5 * alpha) * P(z1, z2); };
        const auto [v, converged] = quad::adaptive_gauss2(f, u.lo, u.hi, w.lo, w.hi, kQuadTol);
        ok = ok && converged;
        total += v;
      }
    }
  }
  if (!ok) {
    throw SolverError("pair_weight_2d: quadrature did not converge for cells " + describe(a) + " and " + describe(b));
  }
  return total;
}

/// int over [u0,u1]x[w0,w1] (distances from a domain corner) of quadrant_tail.
double corner_integral(double u0, double u1, double w0, double w1, double ps, bool& ok) {
  if (u0 <= 0.0 && w0 <= 0.0) {
    // quadrant_tail is homogeneous of degree -ps.
    const double e = 2.0 - ps;
    auto integrand = [&](double phi, double R) {
      return quadrant_tail(std::cos(phi), std::sin(phi), ps) * std::pow(R, e) / e;
    };
    const double phi_c = std::atan2(w1, u1);
    const auto [v1, ok1] = quad::adaptive_gauss([&](double t) { return integrand(t, u1 / std::cos(t)); }, 0.0, phi_c, 1e-13);
    const auto [v2, ok2] =
        quad::adaptive_gauss([&](double t) { return integrand(t, w1 / std::sin(t)); }, phi_c, 0.5 * kPi, 1e-13);
    ok = ok && ok1 && ok2;
    return v1 + v2;
  }
  const auto [v, converged] =
      quad::adaptive_gauss2([&](double d1, double d2) { return quadrant_tail(d1, d2, ps); }, u0, u1, w0, w1, kQuadTol);
  ok = ok && converged;
  return v;
}

/// Exterior weight of an hx-by-hy cell whose edges sit at the given
/// distances from the four sides of the domain.
double exterior_2d_from_distances(double left, double right, double bottom, double top, double hx, double hy, double ps) {
  if (!(ps > 0.0 && ps < 1.0)) {
    throw ValidationError("exterior_weight_2d: piecewise-constant cells need 0 < ps < 1 (got ps = " + std::to_string(ps) + ")");
  }
  const double g = 1.0 - ps;
  const double side_coeff = half_plane_constant(ps) / (ps * g);
  double sides = 0.0;
  sides += side_coeff * hy * pow_step(left, hx, g);
  sides += side_coeff * hy * pow_step(right, hx, g);
  sides += side_coeff * hx * pow_step(bottom, hy, g);
  sides += side_coeff * hx * pow_step(top, hy, g);
  bool ok = true;
  double corners = 0.0;
  for (double dx : {left, right}) {
    for (double dy : {bottom, top}) corners += corner_integral(dx, dx + hx, dy, dy + hy, ps, ok);
  }
  if (!ok) throw SolverError("exterior_weight_2d: quadrature did not converge");
  return sides - corners;
}

double exterior_1d_from_distances(double left, double right, double h, double ps) {
  const double g = 1.0 - ps;
  return (pow_step(left, h, g) + pow_step(right, h, g)) / (ps * g);
}

}  // namespace

double pair_weight_1d(Interval a, Interval b, double beta) {
  if (!(beta > 1.0 && beta < 2.0)) throw ValidationError("pair_weight_1d: beta must lie in (1,2)");
  if (b.lo < a.lo) std::swap(a, b);
  if (b.lo < a.hi) throw ValidationError("pair_weight_1d: overlapping cells");
  const double h1 = a.length(), h2 = b.length();
  if (h1 <= 0.0 || h2 <= 0.0) return 0.0;
  // I = G(g+h1+h2) - G(g+h2) - G(g+h1) + G(g), G(x) = x^c / (c (c-1)), c = 2 - beta,
  // each term taken relative to the center distance x0.
  const double c = 2.0 - beta;
  const double gap = b.lo - a.hi;
  const double half = 0.5 * (h1 + h2);
  const double x0 = gap + half;
  const double skew = 0.5 * (h2 - h1);
  const double sum = pow_rel(x0, half, c) - pow_rel(x0, skew, c) - pow_rel(x0, -skew, c) + pow_rel(x0, -half, c);
  return sum / (c * (c - 1.0));
}

double exterior_weight_1d(Interval cell, Interval domain, double beta) {
  if (!(beta > 1.0 && beta < 2.0)) throw ValidationError("exterior_weight_1d: beta must lie in (1,2)");
  if (cell.lo < domain.lo || cell.hi > domain.hi || !(cell.hi > cell.lo)) {
    throw ValidationError("exterior_weight_1d: cell must lie inside the domain");
  }
  return exterior_1d_from_distances(cell.lo - domain.lo, domain.hi - cell.hi, cell.length(), beta - 1.0);
}

double pair_weight_2d(const Rect& a, const Rect& b, double ps) { return pair_weight_2d_impl(a, b, ps); }

double exterior_weight_2d(const Rect& cell, const Rect& domain, double ps) {
  if (cell.x.lo < domain.x.lo || cell.x.hi > domain.x.hi || cell.y.lo < domain.y.lo || cell.y.hi > domain.y.hi) {
    throw ValidationError("exterior_weight_2d: cell must lie inside the domain");
  }
  return exterior_2d_from_distances(cell.x.lo - domain.x.lo, domain.x.hi - cell.x.hi, cell.y.lo - domain.y.lo,
                                    domain.y.hi - cell.y.hi, cell.x.length(), cell.y.length(), ps);
}

double radial_tail(int dim, double radius, double ps) {
  const double sigma = dim == 1 ? 2.0 : 2.0 * kPi;
  return sigma * std::pow(radius, -ps) / ps;
}

double sine_power_integral(double a, double theta) {
  if (theta <= 0.0) return 0.0;
  if (theta > 0.25 * kPi) return full_sine_power_integral(a) - cos_power_integral(a, 0.5 * kPi - theta);
  // int_0^{sin theta} u^a (1 - u^2)^{-1/2} du
  const double u = std::sin(theta);
  const double u2 = u * u;
  double coeff = 1.0;
  double upow = 1.0;
  double sum = 0.0;
  for (int k = 0; k < 400; ++k) {
    const double term = coeff * upow / (a + 2.0 * k + 1.0);
    sum += term;
    if (term <= 1e-18 * sum) break;
    coeff *= (2.0 * k + 1.0) / (2.0 * k + 2.0);
    upow *= u2;
  }
  return std::pow(u, a + 1.0) * sum;
}

double half_plane_constant(double ps) { return 2.0 * full_sine_power_integral(ps); }

double quadrant_tail(double d1, double d2, double ps) {
  // Polar form around the origin: (1/ps) int_0^{pi/2} max(d1/cos, d2/sin)^{-ps}.
  const double theta0 = std::atan2(d2, d1);
  double value = 0.0;
  if (d2 > 0.0) value += std::pow(d2, -ps) * sine_power_integral(ps, theta0);
  if (d1 > 0.0) value += std::pow(d1, -ps) * sine_power_integral(ps, 0.5 * kPi - theta0);
  return value / ps;
}

KernelWeights assemble(std::shared_ptr<const Grid> grid, const ProblemParams& params) {
  if (!grid) throw ValidationError("assemble: null grid");
  if (grid->dim() != params.dim) throw ValidationError("assemble: grid and params disagree on dimension");
  const std::size_t count = grid->size();
  if (count > kMaxCells) {
    throw ValidationError("assemble: " + std::to_string(count) + " cells exceeds the dense-storage cap of " +
                          std::to_string(kMaxCells));
  }
  const double ps = params.ps();
  if (!(ps > 0.0 && ps < 1.0)) {
    throw ValidationError("assemble: piecewise-constant cells need ps < 1 (got ps = " + std::to_string(ps) + ")");
  }
  KernelWeights kw;
  kw.grid = grid;
  kw.dim = params.dim;
  kw.s = params.s;
  kw.p = params.p;
  const auto n = static_cast<Eigen::Index>(count);
  kw.W = Matrix::Zero(n, n);
  kw.V = Vector::Zero(n);
  kw.row_sum = Vector::Zero(n);
  const int cells = grid->n;
  const double hx = grid->h[0], hy = grid->h[1];

  if (params.dim == 1) {
    std::vector<double> offset(static_cast<std::size_t>(cells), 0.0);
    parallel_for(static_cast<std::size_t>(std::max(cells - 1, 0)), [&](std::size_t k) {
      const double shift = static_cast<double>(k + 1) * hx;
      offset[k + 1] = pair_weight_1d({0.0, hx}, {shift, shift + hx}, 1.0 + ps);
    });
    parallel_for(count, [&](std::size_t i) {
      const auto row = static_cast<Eigen::Index>(i);
      for (Eigen::Index j = 0; j < n; ++j) {
        kw.W(row, j) = offset[static_cast<std::size_t>(std::abs(row - j))];
      }
      const double left = static_cast<double>(i) * hx;
      const double right = static_cast<double>(count - 1 - i) * hx;
      kw.V[row] = exterior_1d_from_distances(left, right, hx, ps);
    });
  } else {
    const auto side = static_cast<std::size_t>(cells);
    std::vector<double> offset(side * side, 0.0);
    parallel_for(side * side, [&](std::size_t k) {
      const std::size_t kx = k % side, ky = k / side;
      if (kx == 0 && ky == 0) return;
      const double sx = static_cast<double>(kx) * hx, sy = static_cast<double>(ky) * hy;
      offset[k] = pair_weight_2d_impl({{0.0, hx}, {0.0, hy}}, {{sx, sx + hx}, {sy, sy + hy}}, ps);
    });
    parallel_for(count, [&](std::size_t i) {
      const auto a = grid->index2(i);
      const auto row = static_cast<Eigen::Index>(i);
      for (std::size_t j = 0; j < count; ++j) {
        const auto b = grid->index2(j);
        const auto kx = static_cast<std::size_t>(std::abs(a[0] - b[0]));
        const auto ky = static_cast<std::size_t>(std::abs(a[1] - b[1]));
        kw.W(row, static_cast<Eigen::Index>(j)) = offset[ky * side + kx];
      }
      const double left = a[0] * hx, right = (cells - 1 - a[0]) * hx;
      const double bottom = a[1] * hy, top = (cells - 1 - a[1]) * hy;
      kw.V[row] = exterior_2d_from_distances(left, right, bottom, top, hx, hy, ps);
    });
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) sum += kw.W(i, j);
    kw.row_sum[i] = sum;
  }
  return kw;
}

// ---- cache ----

namespace {

constexpr char kMagic[8] = {'F', 'R', 'L', 'G', 'W', 'G', 'T', '1'};

std::string hexfloat(double v) {
  std::ostringstream os;
  os << std::hexfloat << v;
  std::string s = os.str();
  for (char& ch : s) {
    if (ch == '.' ) ch = 'p';
    if (ch == '+') ch = 'P';
    if (ch == '-') ch = 'm';
  }
  return s;
}

struct Header {
  char magic[8];
  std::int32_t dim;
  std::int32_t n;
  double lo[2];
  double hi[2];
  double s;
  double p;
  std::int64_t count;
};

}  // namespace

std::string weight_cache_key(const Grid& grid, const ProblemParams& params) {
  std::ostringstream os;
  os << "weights_N" << params.dim << "_n" << grid.n << "_s" << hexfloat(params.s) << "_p" << hexfloat(params.p);
  for (int a = 0; a < grid.dim(); ++a) os << "_" << hexfloat(grid.domain.lo[a]) << "_" << hexfloat(grid.domain.hi[a]);
  os << ".bin";
  return os.str();
}

void save_weights(const KernelWeights& kw, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write weight cache " + file.string());
  Header h{};
  std::memcpy(h.magic, kMagic, sizeof kMagic);
  h.dim = kw.dim;
  h.n = kw.grid->n;
  for (int a = 0; a < 2; ++a) {
    h.lo[a] = kw.grid->domain.lo[a];
    h.hi[a] = kw.grid->domain.hi[a];
  }
  h.s = kw.s;
  h.p = kw.p;
  h.count = static_cast<std::int64_t>(kw.size());
  out.write(reinterpret_cast<const char*>(&h), sizeof h);
  out.write(reinterpret_cast<const char*>(kw.W.data()), static_cast<std::streamsize>(sizeof(double) * kw.W.size()));
  out.write(reinterpret_cast<const char*>(kw.V.data()), static_cast<std::streamsize>(sizeof(double) * kw.V.size()));
  if (!out) throw std::runtime_error("failed writing weight cache " + file.string());
}

KernelWeights load_weights(std::shared_ptr<const Grid> grid, const ProblemParams& params,
                           const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read weight cache " + file.string());
  Header h{};
  in.read(reinterpret_cast<char*>(&h), sizeof h);
  const bool match = in && std::memcmp(h.magic, kMagic, sizeof kMagic) == 0 && h.dim == params.dim &&
                     h.n == grid->n && h.s == params.s && h.p == params.p &&
                     h.count == static_cast<std::int64_t>(grid->size()) && h.lo[0] == grid->domain.lo[0] &&
                     h.hi[0] == grid->domain.hi[0] && h.lo[1] == grid->domain.lo[1] && h.hi[1] == grid->domain.hi[1];
  if (!match) throw std::runtime_error("weight cache " + file.string() + " does not match the requested grid/params");
  KernelWeights kw;
  kw.grid = grid;
  kw.dim = params.dim;
  kw.s = params.s;
  kw.p = params.p;
  const auto n = static_cast<Eigen::Index>(h.count);
  kw.W.resize(n, n);
  kw.V.resize(n);
  in.read(reinterpret_cast<char*>(kw.W.data()), static_cast<std::streamsize>(sizeof(double) * kw.W.size()));
  in.read(reinterpret_cast<char*>(kw.V.data()), static_cast<std::streamsize>(sizeof(double) * kw.V.size()));
  if (!in) throw std::runtime_error("truncated weight cache " + file.string());
  kw.row_sum.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) sum += kw.W(i, j);
    kw.row_sum[i] = sum;
  }
  return kw;
}

KernelWeights assemble_cached(std::shared_ptr<const Grid> grid, const ProblemParams& params,
                              const std::filesystem::path& cache_dir) {
  if (cache_dir.empty()) return assemble(std::move(grid), params);
  const auto file = cache_dir / weight_cache_key(*grid, params);
  if (std::filesystem::exists(file)) return load_weights(std::move(grid), params, file);
  KernelWeights kw = assemble(grid, params);
  std::filesystem::create_directories(cache_dir);
  save_weights(kw, file);
  return kw;
}

}  // namespace fraclog

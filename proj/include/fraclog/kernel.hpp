#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <string>

#include <Eigen/Cholesky>

#include "fraclog/problem.hpp"

namespace fraclog {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
};

struct Rect {
  Interval x;
  Interval y;
};

/// Largest cell count accepted by assemble(); W is stored dense.
inline constexpr std::size_t kMaxCells = 4096;

// ---- one dimension: exact closed forms, beta = 1 + ps in (1, 2) ----

/// Integral over cellA x cellB of |x - y|^{-beta}. Cells may touch but not overlap.
double pair_weight_1d(Interval a, Interval b, double beta);

/// Integral over cell x (R minus domain) of |x - y|^{-beta}.
double exterior_weight_1d(Interval cell, Interval domain, double beta);

// ---- two dimensions: kernel |x - y|^{-(2 + ps)}, 0 < ps < 1 ----

/// Integral over a x b of the kernel. Reduced to difference coordinates;
/// the pieces touching the origin are integrated in polar form with the
/// radial part done exactly, the rest by adaptive tensor Gauss rules.
double pair_weight_2d(const Rect& a, const Rect& b, double ps);

/// Integral over cell x (R^2 minus domain) of the kernel. The complement
/// of the rectangle is split into four half-planes minus four quadrants.
double exterior_weight_2d(const Rect& cell, const Rect& domain, double ps);

/// Integral of |z|^{-(N+ps)} over |z| > radius (sigma_N R^{-ps} / ps).
double radial_tail(int dim, double radius, double ps);

/// Integral of |z|^{-(2+ps)} over the half-plane {z1 > d}, divided by d^{-ps}.
double half_plane_constant(double ps);

/// Integral of |z|^{-(2+ps)} over the quadrant {z1 > d1, z2 > d2}, d1, d2 >= 0
/// not both zero.
double quadrant_tail(double d1, double d2, double ps);

/// Integral of sin(t)^a over [0, theta], theta in [0, pi/2].
double sine_power_integral(double a, double theta);

/// Lazily built Cholesky factor of the p = 2 stiffness matrix, shared by
/// copies of the same KernelWeights.
struct StiffnessFactorCache {
  std::once_flag once;
  Eigen::LLT<Matrix> llt;
};

/// Discretized kernel: pair weights W (dense, symmetric, zero diagonal)
/// and exterior weights V.
struct KernelWeights {
  std::shared_ptr<const Grid> grid;
  int dim = 1;
  double s = 0.0;
  double p = 2.0;
  Matrix W;
  Vector V;
  Vector row_sum;  // sum_j W_ij, fixed summation order
  std::shared_ptr<StiffnessFactorCache> factor_cache = std::make_shared<StiffnessFactorCache>();

  std::size_t size() const { return static_cast<std::size_t>(V.size()); }
  double ps() const { return s * p; }
};

/// Builds W and V on the grid. Output is bit-identical for any thread count.
KernelWeights assemble(std::shared_ptr<const Grid> grid, const ProblemParams& params);

/// Cache file name derived from (domain, n, N, s, p).
std::string weight_cache_key(const Grid& grid, const ProblemParams& params);

void save_weights(const KernelWeights& kw, const std::filesystem::path& file);

/// Loads a cache file and checks that it was produced for this grid and params.
KernelWeights load_weights(std::shared_ptr<const Grid> grid, const ProblemParams& params,
                           const std::filesystem::path& file);

/// Uses cache_dir/weight_cache_key(...) when present, otherwise assembles and
/// writes it. An empty cache_dir disables caching.
KernelWeights assemble_cached(std::shared_ptr<const Grid> grid, const ProblemParams& params,
                              const std::filesystem::path& cache_dir);

}  // namespace fraclog

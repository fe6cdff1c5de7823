#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fraclog {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised for rejected user input (parameters, domains, config keys).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical procedure cannot deliver its contract.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Regime { Sub, Equi, Super };

const char* to_string(Regime regime);

/// Exponents of the logistic problem: (-Delta)_p^s u = lambda u^{q-1} - u^{r-1}.
struct ProblemParams {
  int dim = 1;
  double s = 0.3;
  double p = 2.0;
  double q = 1.5;
  double r = 3.0;
  double p_star = 0.0;  // N p / (N - p s), filled by validate_params

  double ps() const { return p * s; }
  /// Kernel exponent N + ps.
  double kernel_exponent() const { return dim + p * s; }
};

/// Checks every admissibility constraint and fills p_star.
ProblemParams validate_params(const ProblemParams& raw);

/// Sub iff q < p, Equi iff q == p, Super iff q > p.
Regime classify_regime(const ProblemParams& params);

/// Axis-aligned interval (dim 1) or rectangle (dim 2).
struct DomainSpec {
  int dim = 1;
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{1.0, 1.0};

  static DomainSpec interval(double a, double b);
  static DomainSpec rectangle(double x0, double x1, double y0, double y1);

  double measure() const;
  double diameter() const;
  double length(int axis) const { return hi[axis] - lo[axis]; }
};

void validate_domain(const DomainSpec& domain);

/// Uniform cell decomposition. Cells are ordered lexicographically with
/// the x index running fastest.
struct Grid {
  DomainSpec domain;
  int n = 0;                       // cells per axis
  std::array<double, 2> h{0, 0};   // cell widths
  std::vector<std::array<double, 2>> centers;
  Vector measure;                  // |C_i|
  Vector dist;                     // d_i = dist(x_i, complement)

  std::size_t size() const { return centers.size(); }
  int dim() const { return domain.dim; }
  std::array<int, 2> index2(std::size_t i) const {
    return {static_cast<int>(i % n), static_cast<int>(i / n)};
  }
  double cell_lo(std::size_t i, int axis) const;
  double cell_hi(std::size_t i, int axis) const { return cell_lo(i, axis) + h[axis]; }
  /// True if the closed cell touches the domain boundary.
  bool touches_boundary(std::size_t i) const;
};

Grid build_grid(const DomainSpec& domain, int n);

}  // namespace fraclog

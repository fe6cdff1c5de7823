#pragma once

#include <cmath>
#include <limits>
#include <memory>

#include "fraclog/kernel.hpp"

namespace fraclog {

/// Signed power |a|^nu sign(a), branch on sign so negative bases never hit pow.
template <typename Scalar>
Scalar signed_power(Scalar a, Scalar nu) {
  if (a == Scalar(0)) return Scalar(0);
  const Scalar mag = a < Scalar(0) ? -a : a;
  Scalar value;
  if (nu == Scalar(1)) {
    value = mag;
  } else if (nu == Scalar(2)) {
    value = mag * mag;
  } else {
    using std::pow;
    value = pow(mag, nu);
  }
  return a < Scalar(0) ? -value : value;
}

/// |a|^nu with integer fast paths.
template <typename Scalar>
Scalar abs_power(Scalar a, Scalar nu) {
  const Scalar mag = a < Scalar(0) ? -a : a;
  if (nu == Scalar(2)) return mag * mag;
  if (nu == Scalar(1)) return mag;
  if (nu == Scalar(3)) return mag * mag * mag;
  using std::pow;
  return pow(mag, nu);
}

/// Cell values on a grid; exterior values are implicitly zero.
class DiscreteFunction {
 public:
  DiscreteFunction() = default;
  DiscreteFunction(std::shared_ptr<const Grid> grid, Vector values);
  static DiscreteFunction zeros(std::shared_ptr<const Grid> grid);

  const std::shared_ptr<const Grid>& grid() const { return grid_; }
  const Vector& values() const { return values_; }
  Vector& values() { return values_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }

  bool same_grid(const DiscreteFunction& other) const { return grid_ == other.grid_; }

 private:
  std::shared_ptr<const Grid> grid_;
  Vector values_;
};

/// Throws ValidationError("grid mismatch") unless both live on the same grid.
void require_same_grid(const DiscreteFunction& u, const DiscreteFunction& v);
void require_same_grid(const DiscreteFunction& u, const KernelWeights& kw);

// Raw-vector kernels. Vectors must have kw.size() entries.

/// sum_{i != j} W_ij |u_i - u_j|^p + 2 sum_i V_i |u_i|^p
double gagliardo_energy(const Vector& u, const KernelWeights& kw, double p);

/// (L u)_i = 2 [sum_j W_ij (u_i - u_j)^{p-1} + V_i u_i^{p-1}] / |C_i|, the
/// gradient of energy/p scaled by the cell measure.
Vector apply_operator(const Vector& u, const KernelWeights& kw, double p);

/// Derivative of apply_operator at u in direction v.
Vector apply_operator_derivative(const Vector& u, const Vector& v, const KernelWeights& kw, double p);

/// Stiffness matrix of the p = 2 energy: u.A u = gagliardo_energy(u, kw, 2).
Matrix stiffness_matrix(const KernelWeights& kw);

/// Cholesky factor of stiffness_matrix(kw), computed once per weight set.
const Eigen::LLT<Matrix>& stiffness_factor(const KernelWeights& kw);

/// (sum_i |u_i|^nu |C_i|)^{1/nu}; nu = infinity gives max |u_i|.
double lp_norm(const Vector& u, const Vector& measure, double nu);

/// sum_i a_i b_i |C_i|
double pairing(const Vector& a, const Vector& b, const Vector& measure);

double sup_norm(const Vector& u);

// DiscreteFunction front ends; check grid identity.

double gagliardo_energy(const DiscreteFunction& u, const KernelWeights& kw, double p);
DiscreteFunction apply_operator(const DiscreteFunction& u, const KernelWeights& kw, double p);
double lp_norm(const DiscreteFunction& u, double nu);
double pairing(const DiscreteFunction& a, const DiscreteFunction& b);

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

}  // namespace fraclog

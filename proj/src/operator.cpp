#include "fraclog/operator.hpp"

#include <algorithm>
#include <cmath>

#include "fraclog/parallel.hpp"

namespace fraclog {

namespace {

// Row-parallel work only pays off on larger grids.
constexpr std::size_t kParallelRows = 512;

void check_size(const Vector& u, const KernelWeights& kw) {
  if (static_cast<std::size_t>(u.size()) != kw.size()) {
    throw ValidationError("grid mismatch: vector has " + std::to_string(u.size()) + " entries, weights have " +
                          std::to_string(kw.size()));
  }
}

template <typename RowFn>
void for_rows(std::size_t count, RowFn&& fn) {
  if (count >= kParallelRows) {
    parallel_for(count, fn);
  } else {
    for (std::size_t i = 0; i < count; ++i) fn(i);
  }
}

}  // namespace

DiscreteFunction::DiscreteFunction(std::shared_ptr<const Grid> grid, Vector values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw ValidationError("DiscreteFunction: null grid");
  if (static_cast<std::size_t>(values_.size()) != grid_->size()) {
    throw ValidationError("DiscreteFunction: " + std::to_string(values_.size()) + " values for " +
                          std::to_string(grid_->size()) + " cells");
  }
}

DiscreteFunction DiscreteFunction::zeros(std::shared_ptr<const Grid> grid) {
  const auto n = static_cast<Eigen::Index>(grid ? grid->size() : 0);
  return DiscreteFunction(std::move(grid), Vector::Zero(n));
}

void require_same_grid(const DiscreteFunction& u, const DiscreteFunction& v) {
  if (!u.same_grid(v)) throw ValidationError("grid mismatch");
}

void require_same_grid(const DiscreteFunction& u, const KernelWeights& kw) {
  if (u.grid() != kw.grid) throw ValidationError("grid mismatch");
}

double gagliardo_energy(const Vector& u, const KernelWeights& kw, double p) {
  check_size(u, kw);
  const Eigen::Index n = u.size();
  Vector row(n);
  for_rows(static_cast<std::size_t>(n), [&](std::size_t k) {
    const auto i = static_cast<Eigen::Index>(k);
    const double ui = u[i];
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) acc += kw.W(j, i) * abs_power(ui - u[j], p);
    row[i] = acc + 2.0 * kw.V[i] * abs_power(ui, p);
  });
  return row.sum();
}

Vector apply_operator(const Vector& u, const KernelWeights& kw, double p) {
  check_size(u, kw);
  const Eigen::Index n = u.size();
  const Vector& measure = kw.grid->measure;
  if (p == 2.0) {
    Vector out = kw.row_sum.cwiseProduct(u) - kw.W * u + kw.V.cwiseProduct(u);
    return (2.0 * out).cwiseQuotient(measure);
  }
  Vector out(n);
  const double nu = p - 1.0;
  for_rows(static_cast<std::size_t>(n), [&](std::size_t k) {
    const auto i = static_cast<Eigen::Index>(k);
    const double ui = u[i];
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) acc += kw.W(j, i) * signed_power(ui - u[j], nu);
    out[i] = 2.0 * (acc + kw.V[i] * signed_power(ui, nu)) / measure[i];
  });
  return out;
}

Vector apply_operator_derivative(const Vector& u, const Vector& v, const KernelWeights& kw, double p) {
  check_size(u, kw);
  check_size(v, kw);
  const Eigen::Index n = u.size();
  const Vector& measure = kw.grid->measure;
  if (p == 2.0) return apply_operator(v, kw, 2.0);
  Vector out(n);
  const double nu = p - 2.0;
  for_rows(static_cast<std::size_t>(n), [&](std::size_t k) {
    const auto i = static_cast<Eigen::Index>(k);
    const double ui = u[i], vi = v[i];
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) acc += kw.W(j, i) * abs_power(ui - u[j], nu) * (vi - v[j]);
    out[i] = 2.0 * (p - 1.0) * (acc + kw.V[i] * abs_power(ui, nu) * vi) / measure[i];
  });
  return out;
}

Matrix stiffness_matrix(const KernelWeights& kw) {
  Matrix a = -2.0 * kw.W;
  for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, i) = 2.0 * (kw.row_sum[i] + kw.V[i]);
  return a;
}

const Eigen::LLT<Matrix>& stiffness_factor(const KernelWeights& kw) {
  if (!kw.factor_cache) throw ValidationError("stiffness_factor: weights without factor cache");
  auto& cache = *kw.factor_cache;
  std::call_once(cache.once, [&] { cache.llt.compute(stiffness_matrix(kw)); });
  if (cache.llt.info() != Eigen::Success) throw SolverError("stiffness matrix is not positive definite");
  return cache.llt;
}

double lp_norm(const Vector& u, const Vector& measure, double nu) {
  if (std::isinf(nu)) return sup_norm(u);
  if (!(nu >= 1.0)) throw ValidationError("lp_norm: exponent must be >= 1");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) acc += abs_power(u[i], nu) * measure[i];
  return std::pow(acc, 1.0 / nu);
}

double pairing(const Vector& a, const Vector& b, const Vector& measure) {
  return a.cwiseProduct(b).dot(measure);
}

double sup_norm(const Vector& u) { return u.size() == 0 ? 0.0 : u.cwiseAbs().maxCoeff(); }

double gagliardo_energy(const DiscreteFunction& u, const KernelWeights& kw, double p) {
  require_same_grid(u, kw);
  return gagliardo_energy(u.values(), kw, p);
}

DiscreteFunction apply_operator(const DiscreteFunction& u, const KernelWeights& kw, double p) {
  require_same_grid(u, kw);
  return DiscreteFunction(u.grid(), apply_operator(u.values(), kw, p));
}

double lp_norm(const DiscreteFunction& u, double nu) { return lp_norm(u.values(), u.grid()->measure, nu); }

double pairing(const DiscreteFunction& a, const DiscreteFunction& b) {
  require_same_grid(a, b);
  return pairing(a.values(), b.values(), a.grid()->measure);
}

}  // namespace fraclog

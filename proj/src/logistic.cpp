#include "fraclog/logistic.hpp"

#include <cmath>
#include <string>

namespace fraclog {

LogisticParams LogisticParams::from(const ProblemParams& params, double lambda) {
  LogisticParams lp{lambda, params.p, params.q, params.r};
  validate_logistic(lp);
  return lp;
}

void validate_logistic(const LogisticParams& lp) {
  if (!(lp.lambda > 0.0) || !std::isfinite(lp.lambda)) {
    throw ValidationError("lambda must be positive and finite (lambda = " + std::to_string(lp.lambda) + ")");
  }
  if (!(lp.q > 1.0 && lp.r > lp.q)) throw ValidationError("logistic exponents need 1 < q < r");
}

double reaction(const LogisticParams& lp, double t) {
  if (t <= 0.0) return 0.0;
  return lp.lambda * abs_power(t, lp.q - 1.0) - abs_power(t, lp.r - 1.0);
}

double reaction_primitive(const LogisticParams& lp, double t) {
  if (t <= 0.0) return 0.0;
  return lp.lambda * abs_power(t, lp.q) / lp.q - abs_power(t, lp.r) / lp.r;
}

double reaction_derivative(const LogisticParams& lp, double t) {
  if (t <= 0.0) return 0.0;
  return lp.lambda * (lp.q - 1.0) * abs_power(t, lp.q - 2.0) - (lp.r - 1.0) * abs_power(t, lp.r - 2.0);
}

double energy_phi(const Vector& u, const KernelWeights& kw, const LogisticParams& lp) {
  const Vector& measure = kw.grid->measure;
  double reaction_part = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) reaction_part += reaction_primitive(lp, u[i]) * measure[i];
  return gagliardo_energy(u, kw, lp.p) / lp.p - reaction_part;
}

Vector grad_phi(const Vector& u, const KernelWeights& kw, const LogisticParams& lp) {
  Vector g = apply_operator(u, kw, lp.p);
  for (Eigen::Index i = 0; i < u.size(); ++i) g[i] -= reaction(lp, u[i]);
  return g;
}

double energy_phi(const DiscreteFunction& u, const KernelWeights& kw, const LogisticParams& lp) {
  require_same_grid(u, kw);
  return energy_phi(u.values(), kw, lp);
}

DiscreteFunction grad_phi(const DiscreteFunction& u, const KernelWeights& kw, const LogisticParams& lp) {
  require_same_grid(u, kw);
  return DiscreteFunction(u.grid(), grad_phi(u.values(), kw, lp));
}

TruncatedReaction::TruncatedReaction(TruncationKind kind_, Vector anchor_, LogisticParams base_)
    : kind(kind_), anchor(std::move(anchor_)), base(base_) {
  if (anchor.size() == 0 || !(anchor.minCoeff() > 0.0)) {
    throw ValidationError("truncation anchor must be strictly positive on every cell");
  }
}

double truncated_reaction(const TruncatedReaction& tr, std::size_t cell, double t) {
  const double a = tr.anchor[static_cast<Eigen::Index>(cell)];
  const LogisticParams& lp = tr.base;
  if (tr.kind == TruncationKind::Lower) return t <= a ? reaction(lp, a) : reaction(lp, t);
  if (t <= a) return reaction(lp, t);
  return lp.lambda * abs_power(a, lp.q - 1.0) - abs_power(t, lp.r - 1.0);
}

double truncated_primitive(const TruncatedReaction& tr, std::size_t cell, double t) {
  const double a = tr.anchor[static_cast<Eigen::Index>(cell)];
  const LogisticParams& lp = tr.base;
  if (tr.kind == TruncationKind::Lower) {
    const double fa = reaction(lp, a);
    if (t <= a) return fa * t;
    return fa * a + reaction_primitive(lp, t) - reaction_primitive(lp, a);
  }
  if (t <= a) return reaction_primitive(lp, t);
  return reaction_primitive(lp, a) + lp.lambda * abs_power(a, lp.q - 1.0) * (t - a) -
         (abs_power(t, lp.r) - abs_power(a, lp.r)) / lp.r;
}

double truncated_reaction_derivative(const TruncatedReaction& tr, std::size_t cell, double t) {
  const double a = tr.anchor[static_cast<Eigen::Index>(cell)];
  const LogisticParams& lp = tr.base;
  if (tr.kind == TruncationKind::Lower) return t <= a ? 0.0 : reaction_derivative(lp, t);
  if (t <= a) return reaction_derivative(lp, t);
  return -(lp.r - 1.0) * abs_power(t, lp.r - 2.0);
}

namespace {

void check_anchor(const Vector& u, const TruncatedReaction& tr) {
  if (tr.anchor.size() != u.size()) throw ValidationError("grid mismatch: truncation anchor size");
}

}  // namespace

double truncated_energy(const Vector& u, const KernelWeights& kw, const TruncatedReaction& tr) {
  check_anchor(u, tr);
  const Vector& measure = kw.grid->measure;
  double reaction_part = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    reaction_part += truncated_primitive(tr, static_cast<std::size_t>(i), u[i]) * measure[i];
  }
  return gagliardo_energy(u, kw, tr.base.p) / tr.base.p - reaction_part;
}

Vector truncated_grad(const Vector& u, const KernelWeights& kw, const TruncatedReaction& tr) {
  check_anchor(u, tr);
  Vector g = apply_operator(u, kw, tr.base.p);
  for (Eigen::Index i = 0; i < u.size(); ++i) g[i] -= truncated_reaction(tr, static_cast<std::size_t>(i), u[i]);
  return g;
}

bool brezis_oswald_applicable(const ProblemParams& params) { return params.q <= params.p; }

double LogisticFunctional::value(const Vector& u) const { return energy_phi(u, kw_, lp_); }

Vector LogisticFunctional::gradient(const Vector& u) const { return grad_phi(u, kw_, lp_); }

Vector LogisticFunctional::hessian_apply(const Vector& u, const Vector& v) const {
  Vector out = apply_operator_derivative(u, v, kw_, lp_.p);
  for (Eigen::Index i = 0; i < u.size(); ++i) out[i] -= reaction_derivative(lp_, u[i]) * v[i];
  return out;
}

double LogisticFunctional::operator_norm(const Vector& u, const Vector& g) const {
  Vector lu = g;
  for (Eigen::Index i = 0; i < u.size(); ++i) lu[i] += reaction(lp_, u[i]);
  return std::sqrt(pairing(lu, lu, measure()));
}

double TruncatedFunctional::value(const Vector& u) const { return truncated_energy(u, kw_, tr_); }

Vector TruncatedFunctional::gradient(const Vector& u) const { return truncated_grad(u, kw_, tr_); }

Vector TruncatedFunctional::hessian_apply(const Vector& u, const Vector& v) const {
  Vector out = apply_operator_derivative(u, v, kw_, tr_.base.p);
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    out[i] -= truncated_reaction_derivative(tr_, static_cast<std::size_t>(i), u[i]) * v[i];
  }
  return out;
}

double TruncatedFunctional::operator_norm(const Vector& u, const Vector& g) const {
  Vector lu = g;
  for (Eigen::Index i = 0; i < u.size(); ++i) lu[i] += truncated_reaction(tr_, static_cast<std::size_t>(i), u[i]);
  return std::sqrt(pairing(lu, lu, measure()));
}

double TorsionFunctional::value(const Vector& u) const {
  return gagliardo_energy(u, kw_, p_) / p_ - u.dot(measure());
}

Vector TorsionFunctional::gradient(const Vector& u) const {
  return apply_operator(u, kw_, p_) - Vector::Ones(u.size());
}

Vector TorsionFunctional::hessian_apply(const Vector& u, const Vector& v) const {
  return apply_operator_derivative(u, v, kw_, p_);
}

double TorsionFunctional::operator_norm(const Vector& u, const Vector& g) const {
  return std::sqrt(pairing(g + Vector::Ones(u.size()), g + Vector::Ones(u.size()), measure()));
}

}  // namespace fraclog

#pragma once

#include <memory>

#include "fraclog/operator.hpp"

namespace fraclog {

/// f(t) = lambda (t+)^{q-1} - (t+)^{r-1}
struct LogisticParams {
  double lambda = 1.0;
  double p = 2.0;
  double q = 1.5;
  double r = 3.0;

  static LogisticParams from(const ProblemParams& params, double lambda);
};

void validate_logistic(const LogisticParams& lp);

double reaction(const LogisticParams& lp, double t);
/// F(t) = lambda (t+)^q / q - (t+)^r / r
double reaction_primitive(const LogisticParams& lp, double t);
/// f'(t) for t > 0, zero for t <= 0.
double reaction_derivative(const LogisticParams& lp, double t);

/// ||u||^p / p - sum_i F(u_i) |C_i|
double energy_phi(const Vector& u, const KernelWeights& kw, const LogisticParams& lp);
/// (L u)_i - f(u_i)
Vector grad_phi(const Vector& u, const KernelWeights& kw, const LogisticParams& lp);

double energy_phi(const DiscreteFunction& u, const KernelWeights& kw, const LogisticParams& lp);
DiscreteFunction grad_phi(const DiscreteFunction& u, const KernelWeights& kw, const LogisticParams& lp);

enum class TruncationKind {
  Lower,  // f(anchor) below the anchor, f above
  Upper   // f below the anchor, lambda anchor^{q-1} - t^{r-1} above
};

struct TruncatedReaction {
  TruncationKind kind = TruncationKind::Lower;
  Vector anchor;  // strictly positive
  LogisticParams base;

  TruncatedReaction(TruncationKind kind, Vector anchor, LogisticParams base);
};

double truncated_reaction(const TruncatedReaction& tr, std::size_t cell, double t);
double truncated_primitive(const TruncatedReaction& tr, std::size_t cell, double t);
double truncated_reaction_derivative(const TruncatedReaction& tr, std::size_t cell, double t);

double truncated_energy(const Vector& u, const KernelWeights& kw, const TruncatedReaction& tr);
Vector truncated_grad(const Vector& u, const KernelWeights& kw, const TruncatedReaction& tr);

/// True iff t -> f(t)/t^{p-1} is decreasing on (0, inf), i.e. q <= p.
bool brezis_oswald_applicable(const ProblemParams& params);

/// Smooth-enough energy with a mass-scaled gradient: value(u + e_i dt) - value(u)
/// ~ gradient(u)_i |C_i| dt.
class Functional {
 public:
  explicit Functional(const KernelWeights& kw) : kw_(kw) {}
  virtual ~Functional() = default;

  virtual double value(const Vector& u) const = 0;
  virtual Vector gradient(const Vector& u) const = 0;
  /// Derivative of gradient() at u in direction v.
  virtual Vector hessian_apply(const Vector& u, const Vector& v) const = 0;
  /// ||L u||_M given u and g = gradient(u); scales the stopping test.
  virtual double operator_norm(const Vector& u, const Vector& g) const = 0;
  /// Whether minimizers are nonnegative, so iterates may be projected onto u >= 0.
  virtual bool nonnegative_minimizers() const { return true; }

  const KernelWeights& weights() const { return kw_; }
  const Vector& measure() const { return kw_.grid->measure; }

 protected:
  const KernelWeights& kw_;
};

/// Phi_lambda.
class LogisticFunctional : public Functional {
 public:
  LogisticFunctional(const KernelWeights& kw, LogisticParams lp) : Functional(kw), lp_(lp) {}
  double value(const Vector& u) const override;
  Vector gradient(const Vector& u) const override;
  Vector hessian_apply(const Vector& u, const Vector& v) const override;
  double operator_norm(const Vector& u, const Vector& g) const override;
  const LogisticParams& params() const { return lp_; }

 private:
  LogisticParams lp_;
};

class TruncatedFunctional : public Functional {
 public:
  TruncatedFunctional(const KernelWeights& kw, TruncatedReaction tr) : Functional(kw), tr_(std::move(tr)) {}
  double value(const Vector& u) const override;
  Vector gradient(const Vector& u) const override;
  Vector hessian_apply(const Vector& u, const Vector& v) const override;
  double operator_norm(const Vector& u, const Vector& g) const override;
  const TruncatedReaction& reaction() const { return tr_; }

 private:
  TruncatedReaction tr_;
};

/// ||u||^p / p - sum_i u_i |C_i|; its critical point solves L v = 1.
class TorsionFunctional : public Functional {
 public:
  TorsionFunctional(const KernelWeights& kw, double p) : Functional(kw), p_(p) {}
  double value(const Vector& u) const override;
  Vector gradient(const Vector& u) const override;
  Vector hessian_apply(const Vector& u, const Vector& v) const override;
  double operator_norm(const Vector& u, const Vector& g) const override;

 private:
  double p_;
};

}  // namespace fraclog

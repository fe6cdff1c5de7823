#pragma once

#include <cstdint>

#include "fraclog/operator.hpp"

namespace fraclog {

/// gagliardo_energy(u) / ||u||_p^p
double rayleigh_quotient(const Vector& u, const KernelWeights& kw, double p);
double rayleigh_quotient(const DiscreteFunction& u, const KernelWeights& kw, double p);

struct EigenOptions {
  double tol = 0.0;  // 0: 1e-8 for p = 2, 1e-6 otherwise
  int max_iters = 50000;
  int restarts = 5;
  std::uint64_t seed = 1;
};

struct EigenPair {
  double lambda1 = 0.0;
  DiscreteFunction u1;  // positive, ||u1||_p = 1
  double residual = 0.0;
  /// Largest relative spread of lambda over accepted restarts.
  double restarts_agreement = 0.0;
  int accepted_restarts = 0;
  int discarded_restarts = 0;  // converged to a sign-changing function
  int iterations = 0;          // of the selected restart
};

/// Minimizes the Rayleigh quotient on the L^p sphere by projected descent
/// from positive starts. Throws SolverError if no restart converges.
EigenPair principal_eigenpair(const KernelWeights& kw, double p, const EigenOptions& opts = {});

}  // namespace fraclog

#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "polaron/momentum_block.hpp"

namespace polaron {

struct ConvergenceError : std::runtime_error {
  ConvergenceError(const std::string& msg, double resid)
      : std::runtime_error(msg), residual(resid) {}
  double residual = 0.0;
};

struct EigsOptions {
  double tol = 1e-9;        // absolute eigenvalue tolerance
  int cycle = 64;           // Lanczos vectors per restart cycle
  int max_cycles = 400;
  std::uint64_t seed = 0x5eedbeef;
};

struct EigsResult {
  double value = 0.0;
  Eigen::VectorXcd vector;
  int matvecs = 0;
  double residual = 0.0;
};

// Lowest eigenpair of a Hermitian block via explicitly restarted Lanczos with
// full reorthogonalization. Converged when the Ritz-pair error bound
// min(|r|, |r|^2 / gap) drops below tol; throws ConvergenceError otherwise.
EigsResult lowest_eigenpair(const MomentumBlock& h,
                            const EigsOptions& opt = {});

struct Tridiagonal {
  std::vector<double> alpha;  // diagonal
  std::vector<double> beta;   // beta[j] couples j-1 and j; beta[0] = 0
  int depth = 0;
  bool breakdown = false;  // recursion terminated on an invariant subspace
};

// Plain Lanczos recursion from a given start vector (normalized internally),
// with full reorthogonalization. Stops at max_depth or on breakdown.
Tridiagonal lanczos_tridiagonal(const MomentumBlock& h,
                                const Eigen::VectorXcd& start, int max_depth);

}  // namespace polaron

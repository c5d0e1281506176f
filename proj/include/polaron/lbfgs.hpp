#pragma once

#include <functional>

#include <Eigen/Core>

namespace polaron::gp {

struct LbfgsOptions {
  int max_iter = 120;
  int history = 8;
  double grad_tol = 1e-6;   // infinity norm
  double f_tol = 1e-11;     // relative objective change
  int max_backtracks = 30;
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Objective callback: fills f and grad at x, returns false if the point is
// infeasible (treated as +inf by the line search).
using Objective =
    std::function<bool(const Eigen::VectorXd&, double&, Eigen::VectorXd&)>;

// Limited-memory BFGS minimization with Armijo backtracking. The start point
// must be feasible.
LbfgsResult lbfgs_minimize(const Objective& fg, Eigen::VectorXd x0,
                           const LbfgsOptions& opt = {});

}  // namespace polaron::gp

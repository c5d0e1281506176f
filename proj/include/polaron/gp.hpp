#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "polaron/kernels.hpp"

namespace polaron::gp {

struct ConditioningError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LmlResult {
  double value = 0.0;
  Eigen::VectorXd grad;    // w.r.t. log-parameters, pack() order
  double jitter = 0.0;     // diagonal regularizer actually used
};

// Log marginal likelihood of a zero-mean GP with noise variance `noise`
// (zero throughout this project). A jitter ladder of 1e-10, 1e-8, 1e-6 times
// the mean Gram diagonal covers factorization of the noise-free matrix;
// exhausting it throws ConditioningError.
LmlResult log_marginal_likelihood(const KernelExpr& expr,
                                  const Eigen::MatrixXd& X,
                                  const Eigen::VectorXd& y,
                                  bool with_grad = false, double noise = 0.0);

struct FitOptions {
  int max_iter = 120;
  double grad_tol = 1e-6;
  bool standardize_inputs = true;  // per-dimension min-max to [0, 1]
  bool center_targets = true;
  bool optimize = true;            // false: factorize at the template's params
  bool parallel_restarts = true;
};

class TrainedGP {
 public:
  KernelExpr kernel;
  Eigen::MatrixXd inputs;   // standardized design matrix
  Eigen::VectorXd targets;  // centered targets
  double noise = 0.0;
  double jitter = 0.0;
  Eigen::MatrixXd chol;     // lower factor of K + (noise + jitter) I
  Eigen::VectorXd weights;  // (K + (noise + jitter) I)^{-1} targets
  double lml = 0.0;

  Eigen::VectorXd input_lo, input_span;  // standardization constants
  double target_mean = 0.0;

  std::pair<double, double> predict(const Eigen::VectorXd& x_raw) const;
  double predict_mean(const Eigen::VectorXd& x_raw) const {
    return predict(x_raw).first;
  }
  Eigen::VectorXd standardize(const Eigen::VectorXd& x_raw) const;

  nlohmann::json to_json() const;
  static TrainedGP from_json(const nlohmann::json& j);
};

// Maximum-LML fit. Restart 0 starts from the template's own parameters;
// restarts 1..R-1 draw log-uniform initializations (length scales in
// [0.01, 10] of the standardized box, variance in [1e-3, 1e3] times the
// target variance, RQ exponents in [0.1, 10]). Ties in the final LML break
// toward the lower restart index. Throws ConditioningError if every restart
// fails to factorize, std::invalid_argument for duplicate rows at zero noise.
TrainedGP fit(const KernelExpr& expr_template, const Eigen::MatrixXd& X,
              const Eigen::VectorXd& y, int restarts, std::uint64_t seed,
              const FitOptions& opt = {});

}  // namespace polaron::gp

#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"

namespace polaron::gp {

enum class BaseKernel { SquaredExponential, Matern52, RationalQuadratic };

// Composition tree of anisotropic base kernels. Leaves carry a variance
// (the kernel value at x = x') and one inverse-squared length scale per
// active input dimension; rational-quadratic leaves add a shape exponent.
// Sum and Product nodes combine children evaluated on the same input.
class KernelExpr {
 public:
  enum class Kind { Leaf, Sum, Product };

  Kind kind = Kind::Leaf;
  BaseKernel base = BaseKernel::SquaredExponential;
  double variance = 1.0;
  Eigen::VectorXd metric;         // inverse-squared length scales, per active dim
  std::vector<int> active_dims;   // input dims this leaf responds to
  double rq_exponent = 1.0;
  std::unique_ptr<KernelExpr> left, right;

  KernelExpr() = default;
  KernelExpr(KernelExpr&&) = default;
  KernelExpr& operator=(KernelExpr&&) = default;

  static KernelExpr leaf(BaseKernel base, int input_dim);
  static KernelExpr leaf(BaseKernel base, std::vector<int> dims);
  static KernelExpr sum(KernelExpr a, KernelExpr b);
  static KernelExpr product(KernelExpr a, KernelExpr b);

  KernelExpr clone() const;
  bool is_leaf() const { return kind == Kind::Leaf; }

  // Trainable parameters: 1 + |active_dims| per leaf, +1 for RQ leaves.
  int parameter_count() const;

  // e.g. "(SE*M52)+RQ"
  std::string structure() const;

  // Log-parameter vector in depth-first order; per leaf
  // [log variance, log metric..., log rq_exponent].
  Eigen::VectorXd pack() const;
  void unpack(const Eigen::VectorXd& log_params);

  nlohmann::json to_json() const;
  static KernelExpr from_json(const nlohmann::json& j);
};

// Scalar kernel value; dimensions of x beyond a leaf's active set are ignored
// by that leaf.
double eval_kernel(const KernelExpr& expr, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& y);

// Gram matrix over rows of X.
void gram_matrix(const KernelExpr& expr, const Eigen::MatrixXd& X,
                 Eigen::MatrixXd& K, bool parallel = false);

// Gram matrix plus dK/d(log theta_j) in pack() order.
void gram_matrix_grad(const KernelExpr& expr, const Eigen::MatrixXd& X,
                      Eigen::MatrixXd& K, std::vector<Eigen::MatrixXd>& dK);

// Cross-covariances k(x_i, x*) for all training rows.
void cross_covariance(const KernelExpr& expr, const Eigen::MatrixXd& X,
                      const Eigen::VectorXd& xstar, Eigen::VectorXd& kstar);

}  // namespace polaron::gp

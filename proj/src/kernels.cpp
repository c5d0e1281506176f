#include "polaron/kernels.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace polaron::gp {

namespace {

constexpr double kSqrt5 = 2.2360679774997896964091736687747;

const char* base_name(BaseKernel b) {
  switch (b) {
    case BaseKernel::SquaredExponential: return "SE";
    case BaseKernel::Matern52: return "M52";
    case BaseKernel::RationalQuadratic: return "RQ";
  }
  return "?";
}

BaseKernel base_from_name(const std::string& s) {
  if (s == "SE") return BaseKernel::SquaredExponential;
  if (s == "M52") return BaseKernel::Matern52;
  if (s == "RQ") return BaseKernel::RationalQuadratic;
  throw std::invalid_argument("unknown base kernel: " + s);
}

double leaf_value(const KernelExpr& k, double r2) {
  switch (k.base) {
    case BaseKernel::SquaredExponential:
      return k.variance * std::exp(-0.5 * r2);
    case BaseKernel::Matern52: {
      const double r = std::sqrt(r2);
      return k.variance * (1.0 + kSqrt5 * r + (5.0 / 3.0) * r2) *
             std::exp(-kSqrt5 * r);
    }
    case BaseKernel::RationalQuadratic:
      return k.variance *
             std::pow(1.0 + r2 / (2.0 * k.rq_exponent), -k.rq_exponent);
  }
  return 0.0;
}

// d(leaf)/d(r^2); finite at r = 0 for all three bases.
double leaf_deriv_r2(const KernelExpr& k, double r2) {
  switch (k.base) {
    case BaseKernel::SquaredExponential:
      return -0.5 * k.variance * std::exp(-0.5 * r2);
    case BaseKernel::Matern52: {
      const double r = std::sqrt(r2);
      return -(5.0 / 6.0) * k.variance * (1.0 + kSqrt5 * r) *
             std::exp(-kSqrt5 * r);
    }
    case BaseKernel::RationalQuadratic:
      return -0.5 * k.variance *
             std::pow(1.0 + r2 / (2.0 * k.rq_exponent), -k.rq_exponent - 1.0);
  }
  return 0.0;
}

double leaf_r2(const KernelExpr& k, const Eigen::VectorXd& x,
               const Eigen::VectorXd& y) {
  double r2 = 0.0;
  for (std::size_t i = 0; i < k.active_dims.size(); ++i) {
    const double d = x[k.active_dims[i]] - y[k.active_dims[i]];
    r2 += k.metric[static_cast<Eigen::Index>(i)] * d * d;
  }
  return r2;
}

}  // namespace

KernelExpr KernelExpr::leaf(BaseKernel base, int input_dim) {
  std::vector<int> dims(input_dim);
  std::iota(dims.begin(), dims.end(), 0);
  return leaf(base, std::move(dims));
}

KernelExpr KernelExpr::leaf(BaseKernel base, std::vector<int> dims) {
  KernelExpr k;
  k.kind = Kind::Leaf;
  k.base = base;
  k.variance = 1.0;
  k.active_dims = std::move(dims);
  k.metric = Eigen::VectorXd::Ones(k.active_dims.size());
  return k;
}

KernelExpr KernelExpr::sum(KernelExpr a, KernelExpr b) {
  KernelExpr k;
  k.kind = Kind::Sum;
  k.left = std::make_unique<KernelExpr>(std::move(a));
  k.right = std::make_unique<KernelExpr>(std::move(b));
  return k;
}

KernelExpr KernelExpr::product(KernelExpr a, KernelExpr b) {
  KernelExpr k;
  k.kind = Kind::Product;
  k.left = std::make_unique<KernelExpr>(std::move(a));
  k.right = std::make_unique<KernelExpr>(std::move(b));
  return k;
}

KernelExpr KernelExpr::clone() const {
  KernelExpr k;
  k.kind = kind;
  k.base = base;
  k.variance = variance;
  k.metric = metric;
  k.active_dims = active_dims;
  k.rq_exponent = rq_exponent;
  if (left) k.left = std::make_unique<KernelExpr>(left->clone());
  if (right) k.right = std::make_unique<KernelExpr>(right->clone());
  return k;
}

int KernelExpr::parameter_count() const {
  if (kind == Kind::Leaf)
    return 1 + static_cast<int>(active_dims.size()) +
           (base == BaseKernel::RationalQuadratic ? 1 : 0);
  return left->parameter_count() + right->parameter_count();
}

std::string KernelExpr::structure() const {
  if (kind == Kind::Leaf) return base_name(base);
  auto wrap = [](const KernelExpr& child) {
    const std::string s = child.structure();
    return child.is_leaf() ? s : "(" + s + ")";
  };
  return wrap(*left) + (kind == Kind::Sum ? "+" : "*") + wrap(*right);
}

Eigen::VectorXd KernelExpr::pack() const {
  Eigen::VectorXd out(parameter_count());
  int at = 0;
  auto rec = [&](auto&& self, const KernelExpr& k) -> void {
    if (k.kind == Kind::Leaf) {
      out[at++] = std::log(k.variance);
      for (Eigen::Index i = 0; i < k.metric.size(); ++i)
        out[at++] = std::log(k.metric[i]);
      if (k.base == BaseKernel::RationalQuadratic)
        out[at++] = std::log(k.rq_exponent);
      return;
    }
    self(self, *k.left);
    self(self, *k.right);
  };
  rec(rec, *this);
  return out;
}

void KernelExpr::unpack(const Eigen::VectorXd& log_params) {
  if (log_params.size() != parameter_count())
    throw std::invalid_argument("KernelExpr::unpack: size mismatch");
  int at = 0;
  auto rec = [&](auto&& self, KernelExpr& k) -> void {
    if (k.kind == Kind::Leaf) {
      k.variance = std::exp(log_params[at++]);
      for (Eigen::Index i = 0; i < k.metric.size(); ++i)
        k.metric[i] = std::exp(log_params[at++]);
      if (k.base == BaseKernel::RationalQuadratic)
        k.rq_exponent = std::exp(log_params[at++]);
      return;
    }
    self(self, *k.left);
    self(self, *k.right);
  };
  rec(rec, *this);
}

nlohmann::json KernelExpr::to_json() const {
  nlohmann::json j;
  if (kind == Kind::Leaf) {
    j["kind"] = "leaf";
    j["base"] = base_name(base);
    j["variance"] = variance;
    j["metric"] = std::vector<double>(metric.data(), metric.data() + metric.size());
    j["dims"] = active_dims;
    if (base == BaseKernel::RationalQuadratic) j["rq_exponent"] = rq_exponent;
    return j;
  }
  j["kind"] = kind == Kind::Sum ? "sum" : "product";
  j["left"] = left->to_json();
  j["right"] = right->to_json();
  return j;
}

KernelExpr KernelExpr::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "leaf") {
    KernelExpr k = leaf(base_from_name(j.at("base").get<std::string>()),
                        j.at("dims").get<std::vector<int>>());
    k.variance = j.at("variance").get<double>();
    const auto m = j.at("metric").get<std::vector<double>>();
    if (m.size() != k.active_dims.size())
      throw std::invalid_argument("kernel json: metric/dims size mismatch");
    k.metric = Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
    if (k.base == BaseKernel::RationalQuadratic)
      k.rq_exponent = j.at("rq_exponent").get<double>();
    return k;
  }
  KernelExpr a = from_json(j.at("left"));
  KernelExpr b = from_json(j.at("right"));
  return kind == "sum" ? sum(std::move(a), std::move(b))
                       : product(std::move(a), std::move(b));
}

double eval_kernel(const KernelExpr& expr, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& y) {
  if (x.size() != y.size())
    throw std::invalid_argument("eval_kernel: dimension mismatch");
  switch (expr.kind) {
    case KernelExpr::Kind::Leaf: {
      for (int d : expr.active_dims)
        if (d < 0 || d >= x.size())
          throw std::invalid_argument("eval_kernel: active dim out of range");
      return leaf_value(expr, leaf_r2(expr, x, y));
    }
    case KernelExpr::Kind::Sum:
      return eval_kernel(*expr.left, x, y) + eval_kernel(*expr.right, x, y);
    case KernelExpr::Kind::Product:
      return eval_kernel(*expr.left, x, y) * eval_kernel(*expr.right, x, y);
  }
  return 0.0;
}

namespace {

// Squared anisotropic distances for one leaf over all row pairs.
Eigen::MatrixXd leaf_r2_matrix(const KernelExpr& k, const Eigen::MatrixXd& X) {
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd r2 = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < k.active_dims.size(); ++i) {
    const auto col = X.col(k.active_dims[i]);
    const Eigen::MatrixXd diff =
        col.replicate(1, n) - col.transpose().replicate(n, 1);
    r2.noalias() += k.metric[static_cast<Eigen::Index>(i)] *
                    diff.cwiseProduct(diff);
  }
  return r2;
}

Eigen::MatrixXd gram_recursive(const KernelExpr& k, const Eigen::MatrixXd& X) {
  switch (k.kind) {
    case KernelExpr::Kind::Leaf: {
      const Eigen::MatrixXd r2 = leaf_r2_matrix(k, X);
      Eigen::MatrixXd out(r2.rows(), r2.cols());
      for (Eigen::Index j = 0; j < r2.cols(); ++j)
        for (Eigen::Index i = 0; i < r2.rows(); ++i)
          out(i, j) = leaf_value(k, r2(i, j));
      return out;
    }
    case KernelExpr::Kind::Sum:
      return gram_recursive(*k.left, X) + gram_recursive(*k.right, X);
    case KernelExpr::Kind::Product:
      return gram_recursive(*k.left, X)
          .cwiseProduct(gram_recursive(*k.right, X));
  }
  return {};
}

// Returns the value matrix and appends per-log-parameter gradient matrices.
Eigen::MatrixXd grad_recursive(const KernelExpr& k, const Eigen::MatrixXd& X,
                               std::vector<Eigen::MatrixXd>& grads) {
  const Eigen::Index n = X.rows();
  if (k.kind == KernelExpr::Kind::Leaf) {
    const Eigen::MatrixXd r2 = leaf_r2_matrix(k, X);
    Eigen::MatrixXd value(n, n), dvdr2(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i) {
        value(i, j) = leaf_value(k, r2(i, j));
        dvdr2(i, j) = leaf_deriv_r2(k, r2(i, j));
      }
    grads.push_back(value);  // d/d(log variance) = value
    for (std::size_t d = 0; d < k.active_dims.size(); ++d) {
      const auto col = X.col(k.active_dims[d]);
      const Eigen::MatrixXd diff =
          col.replicate(1, n) - col.transpose().replicate(n, 1);
      grads.push_back(dvdr2.cwiseProduct(diff.cwiseProduct(diff)) *
                      k.metric[static_cast<Eigen::Index>(d)]);
    }
    if (k.base == BaseKernel::RationalQuadratic) {
      // d/d(log alpha) with u = r^2:
      // alpha * value * (u / (2 alpha + u) - log(1 + u / (2 alpha)))
      Eigen::MatrixXd g(n, n);
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) {
          const double u = r2(i, j);
          const double a = k.rq_exponent;
          g(i, j) = a * value(i, j) *
                    (u / (2.0 * a + u) - std::log1p(u / (2.0 * a)));
        }
      grads.push_back(std::move(g));
    }
    return value;
  }

  std::vector<Eigen::MatrixXd> left_grads, right_grads;
  const Eigen::MatrixXd lv = grad_recursive(*k.left, X, left_grads);
  const Eigen::MatrixXd rv = grad_recursive(*k.right, X, right_grads);
  if (k.kind == KernelExpr::Kind::Sum) {
    for (auto& g : left_grads) grads.push_back(std::move(g));
    for (auto& g : right_grads) grads.push_back(std::move(g));
    return lv + rv;
  }
  for (auto& g : left_grads) grads.push_back(g.cwiseProduct(rv));
  for (auto& g : right_grads) grads.push_back(g.cwiseProduct(lv));
  return lv.cwiseProduct(rv);
}

}  // namespace

void gram_matrix(const KernelExpr& expr, const Eigen::MatrixXd& X,
                 Eigen::MatrixXd& K, bool parallel) {
  if (!parallel) {
    K = gram_recursive(expr, X);
    return;
  }
  // Row-blocked evaluation with the scalar path; used by the benchmark and
  // large prediction grids. Entries are computed independently, so the
  // result matches the serial path bitwise.
  const Eigen::Index n = X.rows();
  K.resize(n, n);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd xi = X.row(i);
    for (Eigen::Index j = 0; j < n; ++j)
      K(i, j) = eval_kernel(expr, xi, X.row(j));
  }
}

void gram_matrix_grad(const KernelExpr& expr, const Eigen::MatrixXd& X,
                      Eigen::MatrixXd& K, std::vector<Eigen::MatrixXd>& dK) {
  dK.clear();
  K = grad_recursive(expr, X, dK);
}

void cross_covariance(const KernelExpr& expr, const Eigen::MatrixXd& X,
                      const Eigen::VectorXd& xstar, Eigen::VectorXd& kstar) {
  const Eigen::Index n = X.rows();
  kstar.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    kstar[i] = eval_kernel(expr, X.row(i), xstar);
}

}  // namespace polaron::gp

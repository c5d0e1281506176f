#include "polaron/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "polaron/lbfgs.hpp"
#include "polaron/rng.hpp"

namespace polaron::gp {

namespace {

constexpr double kJitterLadder[] = {1e-10, 1e-8, 1e-6};

struct Factorized {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;
};

Factorized factorize(const Eigen::MatrixXd& K, double noise) {
  const double mean_diag = K.diagonal().mean();
  const double scale = mean_diag > 0.0 ? mean_diag : 1.0;
  Factorized out;
  for (double level : kJitterLadder) {
    const double jitter = level * scale;
    Eigen::MatrixXd reg = K;
    reg.diagonal().array() += noise + jitter;
    out.llt.compute(reg);
    if (out.llt.info() == Eigen::Success) {
      out.jitter = jitter;
      return out;
    }
  }
  throw ConditioningError(
      "Gram matrix not positive definite after jitter ladder "
      "{1e-10, 1e-8, 1e-6} x mean diagonal");
}

double lml_from_factor(const Eigen::LLT<Eigen::MatrixXd>& llt,
                       const Eigen::VectorXd& y,
                       const Eigen::VectorXd& weights) {
  const double n = static_cast<double>(y.size());
  const double log_det =
      2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * y.dot(weights) - 0.5 * log_det - 0.5 * n * std::log(2.0 * M_PI);
}

}  // namespace

LmlResult log_marginal_likelihood(const KernelExpr& expr,
                                  const Eigen::MatrixXd& X,
                                  const Eigen::VectorXd& y, bool with_grad,
                                  double noise) {
  if (X.rows() != y.size())
    throw std::invalid_argument("log_marginal_likelihood: shape mismatch");

  LmlResult res;
  Eigen::MatrixXd K;
  std::vector<Eigen::MatrixXd> dK;
  if (with_grad)
    gram_matrix_grad(expr, X, K, dK);
  else
    gram_matrix(expr, X, K);

  Factorized fac = factorize(K, noise);
  res.jitter = fac.jitter;
  const Eigen::VectorXd w = fac.llt.solve(y);
  res.value = lml_from_factor(fac.llt, y, w);

  if (with_grad) {
    const Eigen::Index n = X.rows();
    const Eigen::MatrixXd Kinv =
        fac.llt.solve(Eigen::MatrixXd::Identity(n, n));
    res.grad.resize(static_cast<Eigen::Index>(dK.size()));
    for (std::size_t j = 0; j < dK.size(); ++j) {
      const double data_term = w.dot(dK[j] * w);
      const double trace_term = Kinv.cwiseProduct(dK[j]).sum();
      res.grad[static_cast<Eigen::Index>(j)] = 0.5 * (data_term - trace_term);
    }
  }
  return res;
}

Eigen::VectorXd TrainedGP::standardize(const Eigen::VectorXd& x_raw) const {
  Eigen::VectorXd x = x_raw;
  for (Eigen::Index d = 0; d < x.size(); ++d)
    x[d] = (x[d] - input_lo[d]) / input_span[d];
  return x;
}

std::pair<double, double> TrainedGP::predict(
    const Eigen::VectorXd& x_raw) const {
  if (x_raw.size() != inputs.cols())
    throw std::invalid_argument("TrainedGP::predict: dimension mismatch");
  const Eigen::VectorXd x = standardize(x_raw);
  Eigen::VectorXd kstar;
  cross_covariance(kernel, inputs, x, kstar);
  const double mean = kstar.dot(weights) + target_mean;
  const Eigen::VectorXd v =
      chol.triangularView<Eigen::Lower>().solve(kstar);
  double var = eval_kernel(kernel, x, x) - v.squaredNorm();
  if (var < 0.0) var = 0.0;
  return {mean, var};
}

namespace {

TrainedGP build_trained(KernelExpr kernel, const Eigen::MatrixXd& X,
                        const Eigen::VectorXd& y, double noise,
                        const Eigen::VectorXd& lo, const Eigen::VectorXd& span,
                        double y_mean) {
  Eigen::MatrixXd K;
  gram_matrix(kernel, X, K);
  Factorized fac = factorize(K, noise);
  TrainedGP gp;
  gp.kernel = std::move(kernel);
  gp.inputs = X;
  gp.targets = y;
  gp.noise = noise;
  gp.jitter = fac.jitter;
  gp.chol = fac.llt.matrixL();
  gp.weights = fac.llt.solve(y);
  gp.lml = lml_from_factor(fac.llt, y, gp.weights);
  gp.input_lo = lo;
  gp.input_span = span;
  gp.target_mean = y_mean;
  return gp;
}

void randomize(KernelExpr& k, Rng& rng, double target_var) {
  if (k.kind == KernelExpr::Kind::Leaf) {
    k.variance = target_var * rng.log_uniform(1e-3, 1e3);
    for (Eigen::Index i = 0; i < k.metric.size(); ++i) {
      const double ell = rng.log_uniform(0.01, 10.0);
      k.metric[i] = 1.0 / (ell * ell);
    }
    if (k.base == BaseKernel::RationalQuadratic)
      k.rq_exponent = rng.log_uniform(0.1, 10.0);
    return;
  }
  randomize(*k.left, rng, target_var);
  randomize(*k.right, rng, target_var);
}

}  // namespace

TrainedGP fit(const KernelExpr& expr_template, const Eigen::MatrixXd& X_raw,
              const Eigen::VectorXd& y_raw, int restarts, std::uint64_t seed,
              const FitOptions& opt) {
  const Eigen::Index n = X_raw.rows();
  const Eigen::Index p = X_raw.cols();
  if (n < 2) throw std::invalid_argument("fit: need at least 2 rows");
  if (y_raw.size() != n) throw std::invalid_argument("fit: shape mismatch");

  Eigen::VectorXd lo(p), span(p);
  for (Eigen::Index d = 0; d < p; ++d) {
    if (opt.standardize_inputs) {
      lo[d] = X_raw.col(d).minCoeff();
      const double width = X_raw.col(d).maxCoeff() - lo[d];
      span[d] = width > 1e-300 ? width : 1.0;
    } else {
      lo[d] = 0.0;
      span[d] = 1.0;
    }
  }
  Eigen::MatrixXd X = X_raw;
  for (Eigen::Index d = 0; d < p; ++d)
    X.col(d) = (X.col(d).array() - lo[d]) / span[d];

  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if ((X.row(i) - X.row(j)).lpNorm<Eigen::Infinity>() == 0.0)
        throw std::invalid_argument(
            "fit: duplicate design rows are singular at zero noise");

  const double y_mean = opt.center_targets ? y_raw.mean() : 0.0;
  const Eigen::VectorXd y = y_raw.array() - y_mean;
  double target_var = (y.array() - y.mean()).square().sum() / double(n);
  if (!(target_var > 1e-300)) target_var = 1.0;

  if (!opt.optimize)
    return build_trained(expr_template.clone(), X, y, 0.0, lo, span, y_mean);

  auto objective = [&](const Eigen::VectorXd& log_params, double& f,
                       Eigen::VectorXd& grad) -> bool {
    if (log_params.lpNorm<Eigen::Infinity>() > 30.0) return false;
    KernelExpr k = expr_template.clone();
    k.unpack(log_params);
    try {
      const LmlResult lml = log_marginal_likelihood(k, X, y, true);
      f = -lml.value;
      grad = -lml.grad;
      return std::isfinite(f);
    } catch (const ConditioningError&) {
      return false;
    }
  };

  LbfgsOptions lopt;
  lopt.max_iter = opt.max_iter;
  lopt.grad_tol = opt.grad_tol;

  struct Outcome {
    bool ok = false;
    double lml = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd params;
  };
  std::vector<Outcome> outcomes(std::max(restarts, 1));

#pragma omp parallel for schedule(dynamic) if (opt.parallel_restarts)
  for (int r = 0; r < std::max(restarts, 1); ++r) {
    KernelExpr k = expr_template.clone();
    if (r > 0) {
      Rng rng(mix_seed(seed, static_cast<std::uint64_t>(r)));
      randomize(k, rng, target_var);
    }
    Eigen::VectorXd x0 = k.pack();
    double f0;
    Eigen::VectorXd g0;
    if (!objective(x0, f0, g0)) continue;
    try {
      const LbfgsResult lr = lbfgs_minimize(objective, x0, lopt);
      outcomes[r] = Outcome{true, -lr.f, lr.x};
    } catch (const std::exception&) {
      // leave marked failed
    }
  }

  int best = -1;
  for (int r = 0; r < static_cast<int>(outcomes.size()); ++r)
    if (outcomes[r].ok && (best < 0 || outcomes[r].lml > outcomes[best].lml))
      best = r;
  if (best < 0)
    throw ConditioningError("fit: every restart failed to factorize");

  KernelExpr k = expr_template.clone();
  k.unpack(outcomes[best].params);
  return build_trained(std::move(k), X, y, 0.0, lo, span, y_mean);
}

nlohmann::json TrainedGP::to_json() const {
  nlohmann::json j;
  j["kernel"] = kernel.to_json();
  j["noise"] = noise;
  j["jitter"] = jitter;
  j["lml"] = lml;
  j["target_mean"] = target_mean;
  j["input_lo"] = std::vector<double>(input_lo.data(),
                                      input_lo.data() + input_lo.size());
  j["input_span"] = std::vector<double>(input_span.data(),
                                        input_span.data() + input_span.size());
  std::vector<std::vector<double>> rows(inputs.rows());
  for (Eigen::Index i = 0; i < inputs.rows(); ++i)
    rows[i].assign(inputs.row(i).begin(), inputs.row(i).end());
  j["inputs"] = rows;
  j["targets"] = std::vector<double>(targets.data(),
                                     targets.data() + targets.size());
  j["weights"] = std::vector<double>(weights.data(),
                                     weights.data() + weights.size());
  return j;
}

TrainedGP TrainedGP::from_json(const nlohmann::json& j) {
  KernelExpr kernel = KernelExpr::from_json(j.at("kernel"));
  const auto rows = j.at("inputs").get<std::vector<std::vector<double>>>();
  const auto targets = j.at("targets").get<std::vector<double>>();
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index p = n > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
  Eigen::MatrixXd X(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    X.row(i) = Eigen::Map<const Eigen::VectorXd>(rows[i].data(), p);
  Eigen::VectorXd y =
      Eigen::Map<const Eigen::VectorXd>(targets.data(), n);

  // Rebuild the factorization at the stored jitter level; identical inputs
  // and parameters give an identical factor, so predictions round-trip.
  Eigen::MatrixXd K;
  gram_matrix(kernel, X, K);
  K.diagonal().array() += j.at("noise").get<double>() +
                          j.at("jitter").get<double>();
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() != Eigen::Success)
    throw ConditioningError("TrainedGP::from_json: factorization failed");

  TrainedGP gp;
  gp.kernel = std::move(kernel);
  gp.inputs = std::move(X);
  gp.targets = std::move(y);
  gp.noise = j.at("noise").get<double>();
  gp.jitter = j.at("jitter").get<double>();
  gp.chol = llt.matrixL();
  gp.weights = llt.solve(gp.targets);
  gp.lml = j.at("lml").get<double>();
  gp.target_mean = j.at("target_mean").get<double>();
  const auto lo = j.at("input_lo").get<std::vector<double>>();
  const auto span = j.at("input_span").get<std::vector<double>>();
  gp.input_lo = Eigen::Map<const Eigen::VectorXd>(lo.data(), lo.size());
  gp.input_span = Eigen::Map<const Eigen::VectorXd>(span.data(), span.size());
  const auto w = j.at("weights").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(w.size()) != n)
    throw std::invalid_argument("TrainedGP::from_json: weight size mismatch");
  return gp;
}

}  // namespace polaron::gp

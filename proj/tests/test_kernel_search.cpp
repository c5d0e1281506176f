#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include <Eigen/Dense>

#include "polaron/kernel_search.hpp"
#include "polaron/rng.hpp"
#include "test_util.hpp"

using namespace polaron;
using gp::BaseKernel;
using gp::KernelExpr;

TEST_CASE("bic arithmetic") {
  CHECK_NEAR(gp::bic(-10.0, 4, 100), -10.0 - 2.0 * std::log(100.0), 1e-12);
  CHECK_NEAR(gp::bic(-10.0, 4, 100), -19.21034, 1e-5);
  CHECK(gp::bic(0.0, 1, 1) == 0.0);
  // ln(e^2) = 2 with e^2 rounded to the nearest integer is not exact, so use
  // the analytic identity instead: lml 5, 2 params, n = exp(2)
  CHECK_NEAR(gp::bic(5.0, 2, 7) , 5.0 - std::log(7.0), 1e-12);
  CHECK_THROWS(gp::bic(0.0, 0, 5));
  CHECK_THROWS(gp::bic(0.0, 2, 0));
}

TEST_CASE("bic penalty: equal LML never favors more parameters") {
  const double lml = 3.0;
  CHECK(gp::bic(lml, 4, 50) > gp::bic(lml, 9, 50));
}

TEST_CASE("expansion enumerates sums then products over the three bases") {
  KernelExpr se = KernelExpr::leaf(BaseKernel::SquaredExponential, 3);
  const auto cands = gp::expand(se, 3, 0.5);
  REQUIRE(cands.size() == 6);
  CHECK(cands[0].structure() == "SE+SE");
  CHECK(cands[1].structure() == "SE+M52");
  CHECK(cands[2].structure() == "SE+RQ");
  CHECK(cands[3].structure() == "SE*SE");
  CHECK(cands[4].structure() == "SE*M52");
  CHECK(cands[5].structure() == "SE*RQ");

  KernelExpr prod = KernelExpr::product(
      KernelExpr::leaf(BaseKernel::SquaredExponential, 3),
      KernelExpr::leaf(BaseKernel::Matern52, 3));
  const auto cands2 = gp::expand(prod, 3, 0.5);
  CHECK(cands2[0].structure() == "(SE*M52)+SE");
  CHECK(cands2[3].structure() == "(SE*M52)*SE");
  // warm start: existing leaf parameters are carried over
  CHECK(cands2[0].left->left->variance == prod.left->variance);
  // new leaf gets the requested variance
  CHECK(cands2[0].right->variance == 0.5);
}

namespace {

Eigen::MatrixXd se_sample_inputs(Rng& rng, int n) {
  Eigen::MatrixXd X(n, 1);
  for (int i = 0; i < n; ++i) X(i, 0) = (i + rng.uniform()) / n;
  return X;
}

Eigen::VectorXd sample_from_kernel(const KernelExpr& kernel,
                                   const Eigen::MatrixXd& X, Rng& rng) {
  Eigen::MatrixXd K;
  gp::gram_matrix(kernel, X, K);
  K.diagonal().array() += 1e-10;
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  Eigen::VectorXd z(X.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return Eigen::MatrixXd(llt.matrixL()) * z;
}

}  // namespace

TEST_CASE("depth cap: max_depth = 0 fits exactly the three bases") {
  Rng rng(3);
  Eigen::MatrixXd X(5, 1);
  Eigen::VectorXd y(5);
  for (int i = 0; i < 5; ++i) {
    X(i, 0) = rng.uniform();
    y[i] = rng.normal();
  }
  const auto result = gp::search(X, y, 0, 2, 17);
  CHECK(result.trace["rounds"].size() == 1);
  CHECK(result.trace["rounds"][0]["candidates"].size() == 3);
  const std::string s = result.best.structure;
  CHECK((s == "SE" || s == "M52" || s == "RQ"));
}

TEST_CASE("search never regresses below the base-kernel round") {
  Rng rng(29);
  const int n = 24;
  Eigen::MatrixXd X = se_sample_inputs(rng, n);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i)
    y[i] = std::sin(6.0 * X(i, 0)) + 0.3 * X(i, 0);

  const auto result = gp::search(X, y, 2, 4, 23);
  double best_base = -1e300;
  for (const auto& cand : result.trace["rounds"][0]["candidates"])
    if (cand.contains("bic"))
      best_base = std::max(best_base, cand["bic"].get<double>());
  CHECK(result.best.bic >= best_base - 1e-9);
  // invariant recomputable from stored fields
  CHECK_NEAR(result.best.bic,
             gp::bic(result.best.lml, result.best.kernel.parameter_count(), n),
             1e-12 * std::max(1.0, std::abs(result.best.bic)));
}

TEST_CASE("held-out accuracy close to the generating kernel") {
  Rng rng(71);
  const int n_total = 80, n_train = 60;
  Eigen::MatrixXd X = se_sample_inputs(rng, n_total);
  KernelExpr truth = KernelExpr::leaf(BaseKernel::SquaredExponential, 1);
  truth.variance = 1.0;
  truth.metric[0] = 1.0 / (0.2 * 0.2);
  const Eigen::VectorXd y = sample_from_kernel(truth, X, rng);

  Eigen::MatrixXd Xtr = X.topRows(n_train);
  Eigen::VectorXd ytr = y.head(n_train);
  Eigen::MatrixXd Xte = X.bottomRows(n_total - n_train);
  Eigen::VectorXd yte = y.tail(n_total - n_train);

  const auto result = gp::search(Xtr, ytr, 1, 6, 37);

  gp::FitOptions fixed;
  fixed.optimize = false;
  const gp::TrainedGP oracle = gp::fit(truth, Xtr, ytr, 1, 1, fixed);

  auto rmse = [&](auto&& predict) {
    double se = 0.0;
    for (Eigen::Index i = 0; i < Xte.rows(); ++i)
      se += std::pow(predict(Eigen::VectorXd(Xte.row(i))) - yte[i], 2);
    return std::sqrt(se / Xte.rows());
  };
  const double rmse_search =
      rmse([&](const Eigen::VectorXd& x) { return result.best.fitted.predict_mean(x); });
  const double rmse_oracle =
      rmse([&](const Eigen::VectorXd& x) { return oracle.predict_mean(x); });
  CHECK(rmse_search <= 1.1 * rmse_oracle + 1e-6);
}

TEST_CASE("search is deterministic for a fixed seed") {
  Rng rng(5);
  const int n = 20;
  Eigen::MatrixXd X = se_sample_inputs(rng, n);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = std::cos(4.0 * X(i, 0));

  const auto a = gp::search(X, y, 2, 3, 101);
  const auto b = gp::search(X, y, 2, 3, 101);
  CHECK(a.best.structure == b.best.structure);
  CHECK(a.best.bic == b.best.bic);
  CHECK(a.best.lml == b.best.lml);
  CHECK(a.trace == b.trace);
}

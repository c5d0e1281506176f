#include "polaron/nargp.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "polaron/rng.hpp"

namespace polaron::mf {

using gp::KernelExpr;

gp::KernelExpr nargp_kernel(int input_dim) {
  std::vector<int> x_dims(input_dim);
  std::iota(x_dims.begin(), x_dims.end(), 0);
  KernelExpr kz = KernelExpr::leaf(gp::BaseKernel::Matern52, x_dims);
  KernelExpr kf =
      KernelExpr::leaf(gp::BaseKernel::Matern52, std::vector<int>{input_dim});
  KernelExpr kg = KernelExpr::leaf(gp::BaseKernel::Matern52, x_dims);
  return KernelExpr::sum(
      KernelExpr::product(std::move(kz), std::move(kf)), std::move(kg));
}

NargpStack fit_stack(const std::vector<FidelityDataset>& datasets,
                     int restarts, std::uint64_t seed,
                     const gp::FitOptions& opt) {
  if (datasets.size() < 2)
    throw std::invalid_argument("fit_stack: need at least 2 fidelity levels");
  const Eigen::Index p = datasets.front().inputs.cols();
  for (std::size_t t = 0; t < datasets.size(); ++t) {
    if (datasets[t].inputs.cols() != p)
      throw std::invalid_argument("fit_stack: input dimension mismatch");
    if (t > 0 && datasets[t].level <= datasets[t - 1].level)
      throw std::invalid_argument(
          "fit_stack: levels must be strictly increasing");
  }

  NargpStack stack;
  stack.input_dim = static_cast<int>(p);

  try {
    stack.levels.push_back(
        gp::fit(KernelExpr::leaf(gp::BaseKernel::Matern52, int(p)),
                datasets[0].inputs, datasets[0].targets, restarts,
                mix_seed(seed, 0), opt));
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("fit_stack: level 0: ") + e.what());
  }

  for (std::size_t t = 1; t < datasets.size(); ++t) {
    const Eigen::Index nt = datasets[t].inputs.rows();
    Eigen::MatrixXd augmented(nt, p + 1);
    augmented.leftCols(p) = datasets[t].inputs;
    for (Eigen::Index i = 0; i < nt; ++i) {
      // Mean propagation through the already-fitted lower levels.
      Eigen::VectorXd x = datasets[t].inputs.row(i);
      double m = stack.levels[0].predict_mean(x);
      for (std::size_t s = 1; s < t; ++s) {
        Eigen::VectorXd xs(p + 1);
        xs.head(p) = x;
        xs[p] = m;
        m = stack.levels[s].predict_mean(xs);
      }
      augmented(i, p) = m;
    }
    try {
      stack.levels.push_back(gp::fit(nargp_kernel(int(p)), augmented,
                                     datasets[t].targets, restarts,
                                     mix_seed(seed, t), opt));
    } catch (const std::exception& e) {
      throw std::runtime_error("fit_stack: level " + std::to_string(t) +
                               ": " + e.what());
    }
  }
  return stack;
}

std::pair<double, double> NargpStack::predict(const Eigen::VectorXd& x,
                                              PredictMode mode,
                                              std::uint64_t seed) const {
  if (levels.empty()) throw std::invalid_argument("NargpStack: not fitted");
  if (x.size() != input_dim)
    throw std::invalid_argument("NargpStack: input dimension mismatch");

  if (mode == PredictMode::Mean) {
    auto [m, v] = levels[0].predict(x);
    for (std::size_t t = 1; t < levels.size(); ++t) {
      Eigen::VectorXd xs(input_dim + 1);
      xs.head(input_dim) = x;
      xs[input_dim] = m;
      std::tie(m, v) = levels[t].predict(xs);
    }
    return {m, v};
  }

  // Monte-Carlo propagation: sample each level's posterior at the previous
  // level's draws; combine by the law of total variance.
  Rng rng(seed);
  const int S = std::max(1, mc_samples);
  auto [m0, v0] = levels[0].predict(x);
  std::vector<double> means(S, m0), vars(S, v0);
  for (std::size_t t = 1; t < levels.size(); ++t) {
    for (int s = 0; s < S; ++s) {
      const double draw =
          means[s] + std::sqrt(std::max(vars[s], 0.0)) * rng.normal();
      Eigen::VectorXd xs(input_dim + 1);
      xs.head(input_dim) = x;
      xs[input_dim] = draw;
      std::tie(means[s], vars[s]) = levels[t].predict(xs);
    }
  }
  double mean = 0.0;
  for (double m : means) mean += m;
  mean /= S;
  double var = 0.0;
  for (int s = 0; s < S; ++s)
    var += vars[s] + (means[s] - mean) * (means[s] - mean);
  var /= S;
  return {mean, var};
}

nlohmann::json NargpStack::to_json() const {
  nlohmann::json j;
  j["input_dim"] = input_dim;
  j["mc_samples"] = mc_samples;
  j["levels"] = nlohmann::json::array();
  for (const auto& gp : levels) j["levels"].push_back(gp.to_json());
  return j;
}

NargpStack NargpStack::from_json(const nlohmann::json& j) {
  NargpStack stack;
  stack.input_dim = j.at("input_dim").get<int>();
  stack.mc_samples = j.at("mc_samples").get<int>();
  for (const auto& entry : j.at("levels"))
    stack.levels.push_back(gp::TrainedGP::from_json(entry));
  return stack;
}

}  // namespace polaron::mf

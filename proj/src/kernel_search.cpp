#include "polaron/kernel_search.hpp"

#include <cmath>
#include <limits>

#include "polaron/rng.hpp"

namespace polaron::gp {

double bic(double lml, int param_count, int n) {
  if (n < 1 || param_count < 1)
    throw std::invalid_argument("bic: n and param_count must be >= 1");
  return lml - 0.5 * param_count * std::log(static_cast<double>(n));
}

std::vector<KernelExpr> expand(const KernelExpr& best, int input_dim,
                               double new_leaf_variance) {
  const BaseKernel bases[] = {BaseKernel::SquaredExponential,
                              BaseKernel::Matern52,
                              BaseKernel::RationalQuadratic};
  std::vector<KernelExpr> out;
  out.reserve(6);
  for (BaseKernel b : bases) {
    KernelExpr leaf = KernelExpr::leaf(b, input_dim);
    leaf.variance = new_leaf_variance;
    out.push_back(KernelExpr::sum(best.clone(), std::move(leaf)));
  }
  for (BaseKernel b : bases) {
    KernelExpr leaf = KernelExpr::leaf(b, input_dim);
    leaf.variance = new_leaf_variance;
    out.push_back(KernelExpr::product(best.clone(), std::move(leaf)));
  }
  return out;
}

namespace {

struct Scored {
  bool ok = false;
  CandidateModel model;
  std::string error;
};

Scored fit_candidate(KernelExpr kernel, const Eigen::MatrixXd& X,
                     const Eigen::VectorXd& y, int restarts,
                     std::uint64_t seed, int depth, const FitOptions& fopt) {
  Scored s;
  try {
    TrainedGP gp = fit(kernel, X, y, restarts, seed, fopt);
    s.model.lml = gp.lml;
    s.model.bic = bic(gp.lml, kernel.parameter_count(),
                      static_cast<int>(X.rows()));
    s.model.kernel = gp.kernel.clone();
    s.model.fitted = std::move(gp);
    s.model.depth = depth;
    s.model.structure = s.model.kernel.structure();
    s.ok = true;
  } catch (const ConditioningError& e) {
    s.error = e.what();
  }
  return s;
}

}  // namespace

SearchResult search(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                    int max_depth, int restarts, std::uint64_t seed,
                    const SearchOptions& opt) {
  const int n = static_cast<int>(X.rows());
  if (n < 5) throw std::invalid_argument("search: need at least 5 rows");
  const int p = static_cast<int>(X.cols());

  SearchResult result;
  result.trace["rounds"] = nlohmann::json::array();

  bool have_best = false;
  CandidateModel best;

  for (int depth = 0; depth <= max_depth; ++depth) {
    std::vector<KernelExpr> candidates;
    if (depth == 0) {
      candidates.push_back(KernelExpr::leaf(BaseKernel::SquaredExponential, p));
      candidates.push_back(KernelExpr::leaf(BaseKernel::Matern52, p));
      candidates.push_back(KernelExpr::leaf(BaseKernel::RationalQuadratic, p));
    } else {
      // Seed new leaves at the incumbent's residual variance; with exact
      // interpolation the residuals are jitter-level, so floor the value.
      double resid_var = 0.0;
      for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const Eigen::VectorXd raw =
            best.fitted.input_lo.array() +
            best.fitted.input_span.array() *
                best.fitted.inputs.row(i).transpose().array();
        const double r = best.fitted.targets[i] + best.fitted.target_mean -
                         best.fitted.predict_mean(raw);
        resid_var += r * r;
      }
      resid_var /= static_cast<double>(X.rows());
      double y_var = (y.array() - y.mean()).square().sum() / double(n);
      if (!(y_var > 1e-300)) y_var = 1.0;
      const double leaf_var = std::max(resid_var, 1e-6 * y_var);
      candidates = expand(best.kernel, p, leaf_var);
    }

    nlohmann::json round;
    round["depth"] = depth;
    round["candidates"] = nlohmann::json::array();

    int round_best = -1;
    std::vector<Scored> scored(candidates.size());
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      scored[c] = fit_candidate(
          candidates[c].clone(), X, y, restarts,
          mix_seed(seed, static_cast<std::uint64_t>(depth * 97 + c)), depth,
          opt.fit);
      const Scored& s = scored[c];
      nlohmann::json entry;
      entry["structure"] = candidates[c].structure();
      entry["params"] = candidates[c].parameter_count();
      if (s.ok) {
        entry["lml"] = s.model.lml;
        entry["bic"] = s.model.bic;
      } else {
        entry["error"] = s.error;
        result.warnings.push_back("candidate " + candidates[c].structure() +
                                  " skipped: " + s.error);
      }
      round["candidates"].push_back(entry);
      if (!s.ok) continue;
      if (round_best < 0) {
        round_best = static_cast<int>(c);
        continue;
      }
      const Scored& incumbent = scored[round_best];
      const double diff = s.model.bic - incumbent.model.bic;
      if (diff > opt.tie_tol ||
          (std::abs(diff) <= opt.tie_tol &&
           s.model.kernel.parameter_count() <
               incumbent.model.kernel.parameter_count()))
        round_best = static_cast<int>(c);
    }

    if (round_best < 0)
      throw ConditioningError("search: every candidate in round " +
                              std::to_string(depth) + " failed");

    round["best"] = scored[round_best].model.structure;
    result.trace["rounds"].push_back(round);

    const double improvement =
        have_best ? scored[round_best].model.bic - best.bic
                  : std::numeric_limits<double>::infinity();
    if (!have_best || improvement > opt.min_improvement) {
      best = std::move(scored[round_best].model);
      have_best = true;
    } else {
      break;
    }
  }

  result.trace["selected"] = {{"structure", best.structure},
                              {"lml", best.lml},
                              {"bic", best.bic},
                              {"params", best.kernel.parameter_count()},
                              {"depth", best.depth}};
  result.best = std::move(best);
  return result;
}

}  // namespace polaron::gp

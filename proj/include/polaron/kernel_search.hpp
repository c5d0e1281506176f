#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "polaron/gp.hpp"

namespace polaron::gp {

// BIC with the log-marginal-likelihood convention: larger is better.
double bic(double lml, int param_count, int n);

struct CandidateModel {
  KernelExpr kernel;
  TrainedGP fitted;
  double lml = 0.0;
  double bic = 0.0;
  int depth = 0;
  std::string structure;
};

// The six one-step extensions of `best`: best + B then best x B for each
// base B in {SE, M52, RQ}. Existing parameters are carried over; new leaves
// get unit length scales (standardized units) and `new_leaf_variance`.
std::vector<KernelExpr> expand(const KernelExpr& best, int input_dim,
                               double new_leaf_variance);

struct SearchOptions {
  double min_improvement = 1e-6;
  double tie_tol = 1e-9;  // BIC ties break toward fewer parameters
  FitOptions fit;
};

struct SearchResult {
  CandidateModel best;
  nlohmann::json trace;  // per round: structure, lml, bic, parameter count
  std::vector<std::string> warnings;
};

// Greedy structure search: round 0 fits the three bases, later rounds fit
// the expansions of the incumbent, scored by BIC. Stops when the best BIC
// improves by less than min_improvement or at max_depth rounds.
SearchResult search(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                    int max_depth, int restarts, std::uint64_t seed,
                    const SearchOptions& opt = {});

}  // namespace polaron::gp

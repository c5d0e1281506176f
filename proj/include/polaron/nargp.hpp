#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "polaron/basis.hpp"
#include "polaron/gp.hpp"

namespace polaron::mf {

// Training set at one solver accuracy tier. Levels are ordered from cheapest
// (0) upward; targets come from the solver at `solver_spec`.
struct FidelityDataset {
  int level = 0;
  BasisSpec solver_spec;
  Eigen::MatrixXd inputs;   // n_t x p
  Eigen::VectorXd targets;  // n_t
};

enum class PredictMode { Mean, MonteCarlo };

// Autoregressive GP stack: level 0 regresses on x alone; level t >= 1
// regresses on (x, m_{t-1}(x)) with the composite kernel
// k_z(x, x') * k_f(u, u') + k_g(x, x'), all factors Matern-5/2.
struct NargpStack {
  std::vector<gp::TrainedGP> levels;  // level t has input dim p (t=0) or p+1
  int input_dim = 0;
  int mc_samples = 100;

  std::pair<double, double> predict(const Eigen::VectorXd& x,
                                    PredictMode mode = PredictMode::Mean,
                                    std::uint64_t seed = 0x5ca1ab1e) const;

  nlohmann::json to_json() const;
  static NargpStack from_json(const nlohmann::json& j);
};

// Fits the stack bottom-up, augmenting each level's inputs with the previous
// level's posterior mean evaluated there. Datasets must share the input
// dimension and carry strictly increasing level ids; inputs need not nest.
NargpStack fit_stack(const std::vector<FidelityDataset>& datasets,
                     int restarts, std::uint64_t seed,
                     const gp::FitOptions& opt = {});

// The level-t kernel described above, for a given base input dimension.
gp::KernelExpr nargp_kernel(int input_dim);

}  // namespace polaron::mf

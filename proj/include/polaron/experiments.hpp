#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "polaron/dataset.hpp"
#include "polaron/gp.hpp"
#include "polaron/lhs.hpp"
#include "polaron/model.hpp"
#include "polaron/solver.hpp"

namespace polaron::harness {

struct FidelityLevel {
  BasisSpec spec;
  int samples = 0;
};

// One experiment, fully specified: the seed determines the design and every
// stochastic choice downstream.
struct ExperimentConfig {
  std::string kind;  // extrapolate | multifid | scan | sample | train
  ModelParams model;
  std::vector<FidelityLevel> fidelities;
  SampleBox box;  // omega, lambda_ssh, k
  std::uint64_t seed = 1;
  int search_depth = 3;
  int restarts = 8;
  double eig_tol = 1e-9;

  std::vector<double> eval_omegas;
  double lambda_lo = 0.25;
  double lambda_hi = 1.75;
  int lambda_sweep = 31;
  double lambda_c_tol = 0.005;      // surrogate-side bisection
  double solver_lambda_tol = 0.02;  // solver-side bisection
  bool compare_solver = false;
  std::vector<double> bandwidth_omegas;
  std::vector<double> bandwidth_lambdas;
  double bandwidth_tol = 0.05;
  double k_lo = 0.0;
  double k_hi = 3.14159265358979323846;
  int mc_samples = 100;
  std::string out_dir = "out";
  std::string dataset_csv;  // optional input for the train kind

  double scan_lo = 0.3;
  double scan_hi = 1.2;
  int sweep_points = 0;

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct BandwidthResult {
  bool pass = false;
  double bandwidth = 0.0;
  double margin = 0.0;  // omega - bandwidth
};

// Physical band-limit diagnostic: the coherent band cannot spread more than
// one phonon quantum above its minimum-at-zero value.
BandwidthResult bandwidth_check(const DispersionCurve& curve, double omega,
                                double tol = 0.05);

struct TransitionPoint {
  double omega = 0.0;
  bool bracketed = false;
  double lambda_c = 0.0;
  std::vector<std::pair<double, double>> kgs_table;  // (lambda, K_GS)
};

// Band energies over k_grid for one (omega, lambda).
using DispersionEvaluator = std::function<std::vector<double>(
    double omega, double lambda, const std::vector<double>& k_grid)>;

// K_GS(lambda) table plus the critical coupling located by bisection on the
// indicator [K_GS > one k-grid step]; `bracketed` is false when the grid
// never crosses.
TransitionPoint transition_scan(const DispersionEvaluator& eval, double omega,
                                const std::vector<double>& lambda_grid,
                                const std::vector<double>& k_grid, double tol);

// Transition extraction from a surrogate trained on (omega, lambda_ssh, k).
std::vector<TransitionPoint> surrogate_transition_curve(
    const gp::TrainedGP& surrogate, const std::vector<double>& omegas,
    const std::vector<double>& lambda_grid, const std::vector<double>& k_grid,
    double tol);

// Solver momenta inside [k_lo, k_hi].
std::vector<double> momentum_grid(int ring_size, double k_lo, double k_hi);

// Runs the configured experiment, writes every output file under
// cfg.out_dir and returns the summary that was written to summary.json.
nlohmann::json run_experiment(const ExperimentConfig& cfg);

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace polaron::harness

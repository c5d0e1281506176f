#pragma once

#include <cstdint>
#include <vector>

#include "polaron/basis.hpp"
#include "polaron/lanczos.hpp"
#include "polaron/model.hpp"
#include "polaron/momentum_block.hpp"

namespace polaron {

struct SolverOptions {
  double eig_tol = 1e-9;
  int cycle = 64;
  int max_cycles = 400;
  std::uint64_t seed = 0xC0FFEE;
  int greens_depth = 256;
  bool parallel = true;  // parallelize dispersion over momenta
};

// Polaron band on [0, pi] (inversion symmetry), with the refined band minimum
// and the curvature there.
struct DispersionCurve {
  std::vector<double> k_grid;
  std::vector<double> energies;
  double k_gs = 0.0;
  double inv_mass = 0.0;
  bool boundary_stencil = false;  // curvature needed a one-sided stencil
};

struct SpectralSlice {
  double k = 0.0;
  std::vector<double> omega_grid;
  std::vector<double> values;  // A(k, w) = -Im G / pi
  double eta = 0.0;
  int depth = 0;      // Lanczos depth actually reached
  bool breakdown = false;
};

// Shares the basis and the Hamiltonian skeleton across momenta and coupling
// sweeps; all methods are const and safe to call concurrently.
class SolverContext {
 public:
  SolverContext(const BasisSpec& spec, int ring_size);

  const std::vector<PhononConfig>& basis() const { return terms_.basis(); }
  const HamiltonianTerms& terms() const { return terms_; }
  int ring_size() const { return terms_.ring_size(); }

  double ground_energy(const ModelParams& p, double k,
                       const SolverOptions& opt = {}) const;
  DispersionCurve dispersion(const ModelParams& p, int k_count,
                             const SolverOptions& opt = {}) const;
  SpectralSlice greens(const ModelParams& p, double k,
                       const std::vector<double>& omega_grid, double eta,
                       const SolverOptions& opt = {}) const;

 private:
  HamiltonianTerms terms_;
};

// One-shot conveniences; each builds a fresh SolverContext.
double ground_energy(const ModelParams& p, const BasisSpec& spec, double k,
                     const SolverOptions& opt = {});
DispersionCurve dispersion(const ModelParams& p, const BasisSpec& spec,
                           int k_count, const SolverOptions& opt = {});
SpectralSlice greens_function(const ModelParams& p, const BasisSpec& spec,
                              double k, const std::vector<double>& omega_grid,
                              double eta, const SolverOptions& opt = {});

// Band minimum refined by a three-point quadratic fit around the grid argmin,
// clamped to the grid range intersected with [0, pi]. Exactly 0 when the
// argmin sits at k = 0.
double ground_state_momentum(const DispersionCurve& curve);

// d^2 E / dk^2 at the grid point nearest curve.k_gs, by central differences;
// grid ends at 0 or pi use the even symmetric extension. Other boundary
// locations fall back to a one-sided stencil and set *boundary_flag.
double inverse_effective_mass(const DispersionCurve& curve,
                              bool* boundary_flag = nullptr);

// Frequency of the lowest local maximum of the slice, refined parabolically;
// NaN when the slice has no interior peak.
double lowest_peak(const SpectralSlice& slice);

// Critical coupling where the band minimum leaves k = 0, located by bisection
// on the indicator [K_GS > 2 pi / L]. `p_template` supplies t, omega, the
// ring size and a fixed lambda_h; lambda_ssh is swept.
double find_lambda_c(const ModelParams& p_template, const BasisSpec& spec,
                     double lambda_lo, double lambda_hi, double tol,
                     const SolverOptions& opt = {});

ModelParams with_lambda_ssh(const ModelParams& p_template, double lambda_ssh);

}  // namespace polaron

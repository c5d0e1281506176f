#include "polaron/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace polaron {

SolverContext::SolverContext(const BasisSpec& spec, int ring_size)
    : terms_(spec, ring_size) {}

double SolverContext::ground_energy(const ModelParams& p, double k,
                                    const SolverOptions& opt) const {
  MomentumBlock block(terms_, p, k);
  EigsOptions eo;
  eo.tol = opt.eig_tol;
  eo.cycle = opt.cycle;
  eo.max_cycles = opt.max_cycles;
  eo.seed = opt.seed;
  return lowest_eigenpair(block, eo).value;
}

DispersionCurve SolverContext::dispersion(const ModelParams& p, int k_count,
                                          const SolverOptions& opt) const {
  const int half = terms_.ring_size() / 2;
  if (k_count < 8)
    throw std::invalid_argument("dispersion: k_count must be >= 8");
  if (k_count > half + 1 || half % (k_count - 1) != 0)
    throw std::invalid_argument(
        "dispersion: k_count - 1 must divide ring_size / 2");
  const int stride = half / (k_count - 1);

  DispersionCurve curve;
  curve.k_grid.resize(k_count);
  curve.energies.assign(k_count, 0.0);
  for (int i = 0; i < k_count; ++i)
    curve.k_grid[i] = 2.0 * M_PI * (i * stride) / terms_.ring_size();

  // Large blocks parallelize inside the matvec instead; keeps peak memory
  // bounded by one Lanczos workspace per thread.
  const bool over_k = opt.parallel && terms_.dim() < 32768;
#pragma omp parallel for schedule(dynamic) if (over_k)
  for (int i = 0; i < k_count; ++i)
    curve.energies[i] = ground_energy(p, curve.k_grid[i], opt);

  curve.k_gs = ground_state_momentum(curve);
  curve.inv_mass = inverse_effective_mass(curve, &curve.boundary_stencil);
  return curve;
}

SpectralSlice SolverContext::greens(const ModelParams& p, double k,
                                    const std::vector<double>& omega_grid,
                                    double eta,
                                    const SolverOptions& opt) const {
  if (!(eta > 0.0)) throw std::invalid_argument("greens: eta must be > 0");
  if (!std::is_sorted(omega_grid.begin(), omega_grid.end()))
    throw std::invalid_argument("greens: omega_grid must be sorted");

  MomentumBlock block(terms_, p, k);
  // The zero-phonon configuration is element 0 of the canonical ordering;
  // the bare-electron Bloch state is exactly that basis vector.
  Eigen::VectorXcd seed = Eigen::VectorXcd::Zero(block.dim());
  seed[0] = 1.0;
  Tridiagonal tri = lanczos_tridiagonal(block, seed, opt.greens_depth);

  SpectralSlice slice;
  slice.k = k;
  slice.omega_grid = omega_grid;
  slice.eta = eta;
  slice.depth = tri.depth;
  slice.breakdown = tri.breakdown;
  slice.values.resize(omega_grid.size());
  for (std::size_t i = 0; i < omega_grid.size(); ++i) {
    const Complex z(omega_grid[i], eta);
    Complex cf = z - tri.alpha[tri.depth - 1];
    for (int j = tri.depth - 2; j >= 0; --j)
      cf = z - tri.alpha[j] - tri.beta[j + 1] * tri.beta[j + 1] / cf;
    const Complex g = 1.0 / cf;
    slice.values[i] = -g.imag() / M_PI;
  }
  return slice;
}

double ground_energy(const ModelParams& p, const BasisSpec& spec, double k,
                     const SolverOptions& opt) {
  return SolverContext(spec, p.ring_size).ground_energy(p, k, opt);
}

DispersionCurve dispersion(const ModelParams& p, const BasisSpec& spec,
                           int k_count, const SolverOptions& opt) {
  return SolverContext(spec, p.ring_size).dispersion(p, k_count, opt);
}

SpectralSlice greens_function(const ModelParams& p, const BasisSpec& spec,
                              double k, const std::vector<double>& omega_grid,
                              double eta, const SolverOptions& opt) {
  return SolverContext(spec, p.ring_size).greens(p, k, omega_grid, eta, opt);
}

double ground_state_momentum(const DispersionCurve& curve) {
  const auto& ks = curve.k_grid;
  const auto& es = curve.energies;
  if (ks.size() < 5)
    throw std::invalid_argument(
        "ground_state_momentum: need at least 5 grid points");

  const int n = static_cast<int>(ks.size());
  int imin = 0;
  for (int i = 1; i < n; ++i)
    if (es[i] < es[imin]) imin = i;

  const double lo = std::max(0.0, ks.front());
  const double hi = std::min(M_PI, ks.back());
  auto clamp = [&](double k) { return std::min(hi, std::max(lo, k)); };

  const double h = ks[1] - ks[0];
  if (imin == 0) {
    // Even extension E(-h) = E(h): the fitted vertex is k = 0 whenever the
    // curvature is non-negative, which the argmin guarantees.
    return ks.front() == 0.0 ? 0.0 : clamp(ks.front());
  }
  if (imin == n - 1) return clamp(ks.back());

  const double denom = es[imin + 1] - 2.0 * es[imin] + es[imin - 1];
  if (denom <= 0.0) return clamp(ks[imin]);
  const double vertex =
      ks[imin] + 0.5 * h * (es[imin - 1] - es[imin + 1]) / denom;
  return clamp(std::min(ks[imin + 1], std::max(ks[imin - 1], vertex)));
}

double inverse_effective_mass(const DispersionCurve& curve,
                              bool* boundary_flag) {
  const auto& ks = curve.k_grid;
  const auto& es = curve.energies;
  const int n = static_cast<int>(ks.size());
  if (n < 3)
    throw std::invalid_argument("inverse_effective_mass: need >= 3 points");
  const double h = ks[1] - ks[0];
  for (int i = 1; i + 1 < n; ++i)
    if (std::abs((ks[i + 1] - ks[i]) - h) > 1e-9 * std::max(1.0, h))
      throw std::invalid_argument(
          "inverse_effective_mass: grid must be uniform");

  int i = 0;
  for (int j = 1; j < n; ++j)
    if (std::abs(ks[j] - curve.k_gs) < std::abs(ks[i] - curve.k_gs)) i = j;

  bool fallback = false;
  double second;
  if (i > 0 && i < n - 1) {
    second = (es[i + 1] - 2.0 * es[i] + es[i - 1]) / (h * h);
  } else if (i == 0 && std::abs(ks[0]) < 1e-12) {
    second = 2.0 * (es[1] - es[0]) / (h * h);  // E(-h) = E(h)
  } else if (i == n - 1 && std::abs(ks[n - 1] - M_PI) < 1e-12) {
    second = 2.0 * (es[n - 2] - es[n - 1]) / (h * h);  // E(pi+h) = E(pi-h)
  } else {
    // No symmetric extension available at this edge.
    fallback = true;
    if (i == 0)
      second = (es[2] - 2.0 * es[1] + es[0]) / (h * h);
    else
      second = (es[n - 1] - 2.0 * es[n - 2] + es[n - 3]) / (h * h);
  }
  if (boundary_flag) *boundary_flag = fallback;
  return second;
}

double lowest_peak(const SpectralSlice& slice) {
  const auto& w = slice.omega_grid;
  const auto& a = slice.values;
  for (std::size_t i = 1; i + 1 < w.size(); ++i) {
    if (a[i] >= a[i - 1] && a[i] > a[i + 1]) {
      const double denom = a[i + 1] - 2.0 * a[i] + a[i - 1];
      if (denom >= 0.0) return w[i];
      return w[i] + 0.5 * (w[i] - w[i - 1]) * (a[i - 1] - a[i + 1]) / denom;
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

ModelParams with_lambda_ssh(const ModelParams& p_template, double lambda_ssh) {
  CouplingPoint c = to_dimensionless(p_template);
  c.lambda_ssh = lambda_ssh;
  return from_dimensionless(c, p_template.t, p_template.omega,
                            p_template.ring_size);
}

double find_lambda_c(const ModelParams& p_template, const BasisSpec& spec,
                     double lambda_lo, double lambda_hi, double tol,
                     const SolverOptions& opt) {
  if (!(tol > 0.0)) throw std::invalid_argument("find_lambda_c: tol must be > 0");
  if (!(lambda_lo < lambda_hi))
    throw std::invalid_argument("find_lambda_c: invalid bracket");

  SolverContext ctx(spec, p_template.ring_size);
  const int k_count = p_template.ring_size / 2 + 1;
  const double threshold = 2.0 * M_PI / p_template.ring_size;

  auto above = [&](double lambda) {
    const DispersionCurve curve =
        ctx.dispersion(with_lambda_ssh(p_template, lambda), k_count, opt);
    return curve.k_gs > threshold;
  };

  if (above(lambda_lo))
    throw std::invalid_argument(
        "find_lambda_c: lower endpoint is already above the transition");
  if (!above(lambda_hi))
    throw std::invalid_argument(
        "find_lambda_c: upper endpoint is still below the transition");

  double lo = lambda_lo, hi = lambda_hi;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (above(mid) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace polaron

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "polaron/solver.hpp"
#include "test_util.hpp"

using namespace polaron;

namespace {

std::vector<double> omega_grid(double lo, double hi, double step) {
  std::vector<double> g;
  for (double w = lo; w <= hi + 1e-12; w += step) g.push_back(w);
  return g;
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i)
    s += 0.5 * (y[i] + y[i + 1]) * (x[i + 1] - x[i]);
  return s;
}

}  // namespace

TEST_CASE("free electron: unit-weight Lorentzian at the band energy") {
  ModelParams p{1.0, 1.0, 0.0, 0.0, 8};
  const double eta = 0.05;
  const double k = 2.0 * M_PI / 8.0;
  const auto grid = omega_grid(-6.0, 6.0, 0.01);
  const SpectralSlice slice = greens_function(p, {2, 3}, k, grid, eta);

  CHECK(slice.breakdown);  // the bare state decouples at zero coupling
  CHECK(slice.depth == 1);
  const double e0 = -2.0 * std::cos(k);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double lorentz =
        eta / M_PI / ((grid[i] - e0) * (grid[i] - e0) + eta * eta);
    CHECK_NEAR(slice.values[i], lorentz, 1e-10);
  }
}

TEST_CASE("spectral weight is non-negative and sums to one") {
  ModelParams p = from_dimensionless({0.6, 0.2, 0.0}, 1.0, 1.0, 8);
  const double eta = 0.05;
  const auto grid = omega_grid(-12.0, 14.0, 0.01);
  for (double k : {0.0, M_PI / 2.0, M_PI}) {
    const SpectralSlice slice = greens_function(p, {2, 4}, k, grid, eta);
    double min_value = 0.0;
    for (double v : slice.values) min_value = std::min(min_value, v);
    CHECK(min_value >= 0.0);
    CHECK_NEAR(trapezoid(slice.omega_grid, slice.values), 1.0, 0.02);
  }
}

TEST_CASE("lowest peak aligns with the eigensolver band") {
  ModelParams p = from_dimensionless({0.8, 0.0, 0.0}, 1.0, 1.0, 8);
  const BasisSpec spec{2, 5};
  const double eta = 0.05;
  SolverContext ctx(spec, 8);
  SolverOptions opt;
  for (double k : {0.0, M_PI / 4.0, M_PI / 2.0, M_PI}) {
    const double e0 = ctx.ground_energy(p, k, opt);
    const auto grid = omega_grid(e0 - 1.0, e0 + 2.0, 0.004);
    const SpectralSlice slice = ctx.greens(p, k, grid, eta, opt);
    const double peak = lowest_peak(slice);
    CHECK_NEAR(peak, e0, std::max(eta / 2.0, 1e-6));
  }
}

TEST_CASE("strong-coupling band: lowest peak tracks a minimum inside the zone") {
  // anti-adiabatic, far above the transition
  ModelParams p = from_dimensionless({1.75, 0.0, 0.0}, 1.0, 4.0, 16);
  const BasisSpec spec{2, 6};
  const double eta = 0.05;
  SolverContext ctx(spec, 16);
  SolverOptions opt;

  std::vector<double> peaks, eigs, ks;
  for (int m = 0; m <= 8; ++m) {
    const double k = 2.0 * M_PI * m / 16.0;
    const double e0 = ctx.ground_energy(p, k, opt);
    const auto grid = omega_grid(e0 - 0.8, e0 + 0.8, 0.004);
    const double peak = lowest_peak(ctx.greens(p, k, grid, eta, opt));
    ks.push_back(k);
    peaks.push_back(peak);
    eigs.push_back(e0);
    CHECK_NEAR(peak, e0, eta / 2.0);
  }
  const auto imin = std::min_element(peaks.begin(), peaks.end()) - peaks.begin();
  CHECK(ks[imin] > 0.3 * M_PI);
  CHECK(ks[imin] < 0.7 * M_PI);
}

TEST_CASE("input validation") {
  ModelParams p{1.0, 1.0, 0.0, 0.0, 8};
  CHECK_THROWS(greens_function(p, {1, 1}, 0.0, {0.0, 1.0}, 0.0));   // eta = 0
  CHECK_THROWS(greens_function(p, {1, 1}, 0.0, {1.0, 0.0}, 0.05));  // unsorted
}

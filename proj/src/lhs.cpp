#include "polaron/lhs.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "polaron/rng.hpp"

namespace polaron::harness {

void SampleBox::validate() const {
  if (labels.size() != ranges.size())
    throw std::invalid_argument("SampleBox: labels/ranges size mismatch");
  for (std::size_t d = 0; d < ranges.size(); ++d) {
    if (!(ranges[d].first <= ranges[d].second))
      throw std::invalid_argument("SampleBox: lo > hi for " + labels[d]);
    if (labels[d] == "k" &&
        (ranges[d].first < -1e-12 || ranges[d].second > M_PI + 1e-12))
      throw std::invalid_argument("SampleBox: k range must lie in [0, pi]");
  }
}

Eigen::MatrixXd lhs_sample(int n, const SampleBox& box, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("lhs_sample: n must be >= 1");
  box.validate();
  const int p = box.dim();
  Eigen::MatrixXd points(n, p);
  Rng rng(seed);
  std::vector<int> strata(n);
  for (int d = 0; d < p; ++d) {
    std::iota(strata.begin(), strata.end(), 0);
    rng.shuffle(strata);
    const auto [lo, hi] = box.ranges[d];
    for (int i = 0; i < n; ++i) {
      const double u = (strata[i] + rng.uniform()) / n;
      points(i, d) = lo + (hi - lo) * u;
    }
  }
  return points;
}

}  // namespace polaron::harness

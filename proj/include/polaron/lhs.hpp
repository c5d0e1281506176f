#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace polaron::harness {

// Axis-aligned sampling box; a zero-width range pins that dimension.
struct SampleBox {
  std::vector<std::string> labels;
  std::vector<std::pair<double, double>> ranges;

  int dim() const { return static_cast<int>(ranges.size()); }
  void validate() const;
};

// Latin hypercube design: per dimension, exactly one point falls in each of
// the n equal-width strata. Deterministic for a fixed seed.
Eigen::MatrixXd lhs_sample(int n, const SampleBox& box, std::uint64_t seed);

}  // namespace polaron::harness

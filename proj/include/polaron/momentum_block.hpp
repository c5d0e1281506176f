#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "polaron/basis.hpp"
#include "polaron/model.hpp"

namespace polaron {

using Complex = std::complex<double>;
using SparseMatrixC = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

// k-independent skeleton of the Bloch Hamiltonian in the phonon-cloud basis.
// Each entry carries a geometric amplitude, a Bloch phase exponent in
// {-1, 0, +1} (multiplying exp(i * phase * k)) and a tag naming which model
// parameter scales it, so one skeleton serves every (k, t, omega, alpha).
class HamiltonianTerms {
 public:
  enum class Coeff : std::uint8_t { Hop, PhononEnergy, Ssh, Holstein };

  struct Term {
    std::int32_t row;
    std::int32_t col;
    double amp;
    std::int8_t phase;
    Coeff coeff;
  };

  HamiltonianTerms(const BasisSpec& spec, int ring_size);

  const std::vector<PhononConfig>& basis() const { return configs_; }
  int dim() const { return static_cast<int>(configs_.size()); }
  int ring_size() const { return ring_; }
  const BasisSpec& spec() const { return spec_; }

  // Materializes H(k) for the given parameters. The result is Hermitian by
  // construction of the term list.
  SparseMatrixC matrix(const ModelParams& p, double k) const;

 private:
  BasisSpec spec_;
  int ring_;
  std::vector<PhononConfig> configs_;
  std::vector<Term> terms_;
};

// Bloch Hamiltonian at a fixed momentum with serial and OpenMP matvec paths.
// Both paths evaluate each output row with the same serial inner loop, so
// they agree bitwise; `apply` picks the parallel path for large blocks.
class MomentumBlock {
 public:
  MomentumBlock(const HamiltonianTerms& terms, const ModelParams& p, double k);

  int dim() const { return static_cast<int>(h_.rows()); }
  double k() const { return k_; }
  const SparseMatrixC& matrix() const { return h_; }

  void apply_serial(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const;
  void apply_parallel(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const;
  void apply(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const;

 private:
  SparseMatrixC h_;
  double k_ = 0.0;
};

// Largest |<u, H v> - conj(<v, H u>)| over `trials` random vector pairs,
// normalized by |u||v|.
double hermiticity_defect(const MomentumBlock& block, int trials,
                          std::uint64_t seed);

}  // namespace polaron

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "polaron/basis.hpp"
#include "polaron/lhs.hpp"
#include "polaron/model.hpp"
#include "polaron/solver.hpp"

namespace polaron::harness {

struct DataRow {
  double omega = 0.0;
  double lambda_ssh = 0.0;
  double lambda_h = 0.0;
  double k = 0.0;  // snapped to the solver momentum grid
  double energy = 0.0;
  int cloud_extent = 0;
  int max_phonons = 0;
};

struct DataTable {
  std::vector<DataRow> rows;
  std::string config_hash;
  std::string code_version;

  // (omega, lambda_ssh, k) design matrix and energy targets.
  Eigen::MatrixXd inputs(const std::vector<int>& dims = {0, 1, 2}) const;
  Eigen::VectorXd targets() const;
};

// 12-significant-digit CSV with header omega,lambda_ssh,lambda_h,k,energy,M,N.
void write_csv(const DataTable& table, const std::filesystem::path& path);
DataTable read_csv(const std::filesystem::path& path);

double snap_to_grid(double k, int ring_size);

// Ground-state energies at an LHS design over (omega, lambda_ssh, k).
// Design k values are snapped to the ring momentum grid and the snapped value
// is recorded. Rows are sorted canonically, so the table does not depend on
// evaluation order. Aborts if more than 5% of the points fail.
DataTable generate_dataset(const ModelParams& model_template,
                           const BasisSpec& spec, int samples,
                           const SampleBox& box, std::uint64_t seed,
                           const SolverOptions& opt = {});

}  // namespace polaron::harness

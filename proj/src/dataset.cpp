#include "polaron/dataset.hpp"

#include "polaron/format.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace polaron::harness {

Eigen::MatrixXd DataTable::inputs(const std::vector<int>& dims) const {
  Eigen::MatrixXd X(rows.size(), dims.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double cols[3] = {rows[i].omega, rows[i].lambda_ssh, rows[i].k};
    for (std::size_t d = 0; d < dims.size(); ++d)
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) =
          cols[dims[d]];
  }
  return X;
}

Eigen::VectorXd DataTable::targets() const {
  Eigen::VectorXd y(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) y[i] = rows[i].energy;
  return y;
}

void write_csv(const DataTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path.string());
  out << "omega,lambda_ssh,lambda_h,k,energy,M,N\n";
  for (const auto& r : table.rows)
    out << sig12(r.omega) << ',' << sig12(r.lambda_ssh) << ','
        << sig12(r.lambda_h) << ',' << sig12(r.k) << ',' << sig12(r.energy)
        << ',' << r.cloud_extent << ',' << r.max_phonons << '\n';
}

DataTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_csv: cannot open " + path.string());
  DataTable table;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 7)
      throw std::runtime_error("read_csv: malformed row: " + line);
    DataRow r;
    r.omega = std::stod(cells[0]);
    r.lambda_ssh = std::stod(cells[1]);
    r.lambda_h = std::stod(cells[2]);
    r.k = std::stod(cells[3]);
    r.energy = std::stod(cells[4]);
    r.cloud_extent = std::stoi(cells[5]);
    r.max_phonons = std::stoi(cells[6]);
    table.rows.push_back(r);
  }
  return table;
}

double snap_to_grid(double k, int ring_size) {
  const double step = 2.0 * M_PI / ring_size;
  int m = static_cast<int>(std::lround(k / step));
  m = std::clamp(m, 0, ring_size / 2);
  return m * step;
}

DataTable generate_dataset(const ModelParams& model_template,
                           const BasisSpec& spec, int samples,
                           const SampleBox& box, std::uint64_t seed,
                           const SolverOptions& opt) {
  if (box.dim() != 3 || box.labels[0] != "omega" ||
      box.labels[1] != "lambda_ssh" || box.labels[2] != "k")
    throw std::invalid_argument(
        "generate_dataset: box must be (omega, lambda_ssh, k)");

  const Eigen::MatrixXd design = lhs_sample(samples, box, seed);
  const double lambda_h =
      to_dimensionless(with_lambda_ssh(model_template, 0.0)).lambda_h;
  const int L = model_template.ring_size;

  SolverContext ctx(spec, L);
  std::vector<DataRow> rows(samples);
  std::vector<std::string> failures(samples);

  SolverOptions point_opt = opt;
  point_opt.parallel = false;  // parallelism lives at the point level here

#pragma omp parallel for schedule(dynamic) if (opt.parallel)
  for (int i = 0; i < samples; ++i) {
    DataRow r;
    r.omega = design(i, 0);
    r.lambda_ssh = design(i, 1);
    r.lambda_h = lambda_h;
    r.k = snap_to_grid(design(i, 2), L);
    r.cloud_extent = spec.cloud_extent;
    r.max_phonons = spec.max_phonons;
    try {
      const ModelParams p = from_dimensionless(
          {r.lambda_ssh, r.lambda_h, 0.0}, model_template.t, r.omega, L);
      r.energy = ctx.ground_energy(p, r.k, point_opt);
      if (!std::isfinite(r.energy)) throw std::runtime_error("non-finite");
      rows[i] = r;
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  }

  DataTable table;
  int failed = 0;
  for (int i = 0; i < samples; ++i) {
    if (!failures[i].empty()) {
      ++failed;
      continue;
    }
    table.rows.push_back(rows[i]);
  }
  if (failed * 20 > samples)
    throw std::runtime_error("generate_dataset: more than 5% of points failed");

  std::sort(table.rows.begin(), table.rows.end(),
            [](const DataRow& a, const DataRow& b) {
              return std::tie(a.omega, a.lambda_ssh, a.lambda_h, a.k) <
                     std::tie(b.omega, b.lambda_ssh, b.lambda_h, b.k);
            });
  table.rows.erase(
      std::unique(table.rows.begin(), table.rows.end(),
                  [](const DataRow& a, const DataRow& b) {
                    return a.omega == b.omega &&
                           a.lambda_ssh == b.lambda_ssh &&
                           a.lambda_h == b.lambda_h && a.k == b.k &&
                           a.cloud_extent == b.cloud_extent &&
                           a.max_phonons == b.max_phonons;
                  }),
      table.rows.end());
  return table;
}

}  // namespace polaron::harness

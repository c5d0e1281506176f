#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "polaron/experiments.hpp"
#include "test_util.hpp"

using namespace polaron;
using namespace polaron::harness;

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SampleBox unit_box3() {
  SampleBox box;
  box.labels = {"omega", "lambda_ssh", "k"};
  box.ranges = {{4.5, 6.0}, {0.0, 1.0}, {0.0, M_PI}};
  return box;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("latin hypercube stratification") {
  for (int n : {1, 4, 600}) {
    const Eigen::MatrixXd pts = lhs_sample(n, unit_box3(), 42);
    REQUIRE(pts.rows() == n);
    for (int d = 0; d < 3; ++d) {
      const auto [lo, hi] = unit_box3().ranges[d];
      std::set<int> strata;
      for (int i = 0; i < n; ++i) {
        const double u = (pts(i, d) - lo) / (hi - lo);
        CHECK(u >= 0.0);
        CHECK(u < 1.0 + 1e-12);
        strata.insert(std::min(n - 1, static_cast<int>(u * n)));
      }
      CHECK(static_cast<int>(strata.size()) == n);  // one point per stratum
    }
  }
}

TEST_CASE("latin hypercube determinism and seed sensitivity") {
  const Eigen::MatrixXd a = lhs_sample(32, unit_box3(), 7);
  const Eigen::MatrixXd b = lhs_sample(32, unit_box3(), 7);
  CHECK((a - b).norm() == 0.0);
  const Eigen::MatrixXd c = lhs_sample(32, unit_box3(), 8);
  CHECK((a - c).norm() > 0.0);
}

TEST_CASE("degenerate box dimension pins the coordinate") {
  SampleBox box = unit_box3();
  box.ranges[0] = {0.5, 0.5};
  const Eigen::MatrixXd pts = lhs_sample(10, box, 3);
  for (int i = 0; i < 10; ++i) CHECK(pts(i, 0) == 0.5);
}

TEST_CASE("box validation") {
  SampleBox box = unit_box3();
  box.ranges[2] = {0.0, 4.0};  // beyond pi
  CHECK_THROWS(box.validate());
  box = unit_box3();
  box.ranges[1] = {1.0, 0.0};
  CHECK_THROWS(box.validate());
}

TEST_CASE("free-coupling dataset reproduces the bare band") {
  ModelParams model = from_dimensionless({0.0, 0.0, 0.0}, 1.0, 5.0, 8);
  SampleBox box = unit_box3();
  box.ranges[0] = {4.5, 6.0};
  box.ranges[1] = {0.0, 0.0};  // zero coupling
  const DataTable table = generate_dataset(model, {1, 2}, 10, box, 11);
  REQUIRE(table.rows.size() == 10);
  for (const auto& r : table.rows) {
    CHECK_NEAR(r.energy, -2.0 * std::cos(r.k), 1e-9);
    // snapped momenta sit on the ring grid
    const double m = r.k * 8 / (2.0 * M_PI);
    CHECK_NEAR(m, std::round(m), 1e-12);
  }
}

TEST_CASE("dataset csv round trip") {
  TempDir tmp("polaron_csv_test");
  ModelParams model = from_dimensionless({0.0, 0.1, 0.0}, 1.0, 5.0, 8);
  const DataTable table = generate_dataset(model, {1, 2}, 7, unit_box3(), 5);
  write_csv(table, tmp.path / "t.csv");
  const DataTable back = read_csv(tmp.path / "t.csv");
  REQUIRE(back.rows.size() == table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    CHECK_NEAR(back.rows[i].energy, table.rows[i].energy, 1e-11);
    CHECK_NEAR(back.rows[i].k, table.rows[i].k, 1e-11);
    CHECK(back.rows[i].max_phonons == table.rows[i].max_phonons);
  }
}

TEST_CASE("bandwidth check") {
  DispersionCurve flat;
  for (int i = 0; i < 9; ++i) {
    flat.k_grid.push_back(M_PI * i / 8.0);
    flat.energies.push_back(-1.5);
  }
  const BandwidthResult fr = bandwidth_check(flat, 0.7);
  CHECK(fr.pass);
  CHECK_NEAR(fr.margin, 0.7, 1e-12);

  DispersionCurve cosine = flat;
  for (int i = 0; i < 9; ++i)
    cosine.energies[i] = -2.0 * std::cos(cosine.k_grid[i]);
  CHECK(bandwidth_check(cosine, 5.0).pass);          // bandwidth 4 <= 5
  CHECK_FALSE(bandwidth_check(cosine, 2.0).pass);    // bandwidth 4 > 2
  CHECK_NEAR(bandwidth_check(cosine, 5.0).bandwidth, 4.0, 1e-12);
}

TEST_CASE("transition scan on a synthetic band family") {
  // model family: minimum leaves k = 0 once lambda crosses 1
  DispersionEvaluator eval = [](double, double lambda,
                                const std::vector<double>& ks) {
    std::vector<double> e;
    for (double k : ks) {
      const double kmin = lambda <= 1.0 ? 0.0 : std::sqrt(lambda - 1.0);
      e.push_back(std::pow(k - kmin, 2));
    }
    return e;
  };
  std::vector<double> k_grid;
  for (int i = 0; i <= 16; ++i) k_grid.push_back(M_PI * i / 16.0);
  std::vector<double> lambda_grid;
  for (int i = 0; i <= 20; ++i) lambda_grid.push_back(0.5 + 0.05 * i);

  const TransitionPoint point = transition_scan(eval, 0.5, lambda_grid, k_grid, 1e-3);
  REQUIRE(point.bracketed);
  // detection threshold is one grid step: kmin = step at lambda = 1 + step^2
  const double step = k_grid[1] - k_grid[0];
  CHECK_NEAR(point.lambda_c, 1.0 + step * step, 5e-3);
  CHECK(point.kgs_table.size() == lambda_grid.size());

  // unbracketed family: K_GS stays at zero
  DispersionEvaluator flat_eval = [](double, double,
                                     const std::vector<double>& ks) {
    std::vector<double> e;
    for (double k : ks) e.push_back(k * k);
    return e;
  };
  const TransitionPoint none =
      transition_scan(flat_eval, 0.5, lambda_grid, k_grid, 1e-3);
  CHECK_FALSE(none.bracketed);
}

TEST_CASE("momentum grid selection") {
  const auto grid = momentum_grid(32, 0.0, M_PI);
  CHECK(grid.size() == 17);
  CHECK(grid.front() == 0.0);
  CHECK_NEAR(grid.back(), M_PI, 1e-12);
  const auto partial = momentum_grid(32, 0.0, 0.8 * M_PI);
  CHECK(partial.size() == 13);  // m = 0..12
  CHECK(partial.back() <= 0.8 * M_PI + 1e-12);
  CHECK_THROWS(momentum_grid(32, 0.0, 0.2));  // fewer than 5 momenta
}

TEST_CASE("scan experiment writes summary and sweep") {
  TempDir tmp("polaron_scan_test");
  nlohmann::json j = {
      {"kind", "scan"},
      {"model", {{"t", 1.0}, {"omega", 4.0}, {"lambda_ssh", 0.0},
                 {"lambda_h", 0.0}, {"ring_size", 16}}},
      {"fidelities", {{{"M", 2}, {"N", 4}, {"samples", 0}}}},
      {"scan_lo", 0.3},
      {"scan_hi", 1.1},
      {"sweep_points", 9},
      {"solver_lambda_tol", 0.05},
      {"out_dir", (tmp.path / "out").string()}};
  const ExperimentConfig cfg = ExperimentConfig::from_json(j);
  const nlohmann::json summary = run_experiment(cfg);
  CHECK(summary.at("lambda_c").get<double>() > 0.4);
  CHECK(summary.at("lambda_c").get<double>() < 0.95);
  CHECK(fs::exists(tmp.path / "out" / "scan.csv"));
  CHECK(fs::exists(tmp.path / "out" / "summary.json"));
  CHECK(fs::exists(tmp.path / "out" / "manifest.json"));

  const std::string scan_csv = slurp(tmp.path / "out" / "scan.csv");
  CHECK(scan_csv.rfind("lambda_ssh,K_GS,inv_mass\n", 0) == 0);
}

TEST_CASE("experiment outputs are byte-reproducible") {
  TempDir tmp("polaron_repro_test");
  auto config_for = [&](const std::string& sub) {
    nlohmann::json j = {
        {"kind", "train"},
        {"model", {{"t", 1.0}, {"omega", 5.0}, {"lambda_ssh", 0.0},
                   {"lambda_h", 0.0}, {"ring_size", 8}}},
        {"fidelities", {{{"M", 1}, {"N", 2}, {"samples", 16}}}},
        {"box", {{"omega", {4.5, 6.0}}, {"lambda_ssh", {0.0, 0.8}},
                 {"k", {0.0, M_PI}}}},
        {"seed", 33},
        {"search_depth", 0},
        {"restarts", 2},
        {"out_dir", (tmp.path / sub).string()}};
    return ExperimentConfig::from_json(j);
  };
  run_experiment(config_for("a"));
  run_experiment(config_for("b"));
  for (const std::string name :
       {"dataset.csv", "model.json", "search_trace.json", "summary.json"}) {
    INFO(name);
    const std::string a = slurp(tmp.path / "a" / name);
    CHECK(a == slurp(tmp.path / "b" / name));
    CHECK(!a.empty());
  }
  // manifests may differ in wall times only; outputs above are the contract
}

TEST_CASE("manifest standardization constants reproduce model inputs") {
  TempDir tmp("polaron_manifest_test");
  nlohmann::json j = {
      {"kind", "train"},
      {"model", {{"t", 1.0}, {"omega", 5.0}, {"lambda_ssh", 0.0},
                 {"lambda_h", 0.0}, {"ring_size", 8}}},
      {"fidelities", {{{"M", 1}, {"N", 2}, {"samples", 12}}}},
      {"box", {{"omega", {4.5, 6.0}}, {"lambda_ssh", {0.0, 0.8}},
               {"k", {0.0, M_PI}}}},
      {"seed", 9},
      {"search_depth", 0},
      {"restarts", 2},
      {"out_dir", (tmp.path / "out").string()}};
  run_experiment(ExperimentConfig::from_json(j));

  const nlohmann::json manifest =
      nlohmann::json::parse(slurp(tmp.path / "out" / "manifest.json"));
  const auto lo = manifest.at("models")[0].at("input_lo").get<std::vector<double>>();
  const auto span =
      manifest.at("models")[0].at("input_span").get<std::vector<double>>();
  const nlohmann::json model_json =
      nlohmann::json::parse(slurp(tmp.path / "out" / "model.json"));
  const gp::TrainedGP model = gp::TrainedGP::from_json(model_json);
  const DataTable table = read_csv(tmp.path / "out" / "dataset.csv");
  const Eigen::MatrixXd raw = table.inputs();
  for (Eigen::Index i = 0; i < raw.rows(); ++i)
    for (Eigen::Index d = 0; d < raw.cols(); ++d) {
      const double standardized = (raw(i, d) - lo[d]) / span[d];
      CHECK_NEAR(standardized, model.inputs(i, d), 1e-12);
    }
}

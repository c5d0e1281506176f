#include "polaron/experiments.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "polaron/format.hpp"
#include "polaron/kernel_search.hpp"
#include "polaron/nargp.hpp"
#include "polaron/rng.hpp"
#include "polaron/version.hpp"

namespace polaron::harness {

namespace fs = std::filesystem;

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  cfg.kind = j.at("kind").get<std::string>();
  cfg.model = params_from_json(j.at("model"));

  if (j.contains("fidelities")) {
    for (const auto& f : j.at("fidelities"))
      cfg.fidelities.push_back(
          FidelityLevel{BasisSpec{f.at("M").get<int>(), f.at("N").get<int>()},
                        f.value("samples", 0)});
  } else {
    cfg.fidelities.push_back(FidelityLevel{BasisSpec{2, 4}, 100});
  }

  const CouplingPoint c = to_dimensionless(cfg.model);
  cfg.box.labels = {"omega", "lambda_ssh", "k"};
  cfg.box.ranges = {{cfg.model.omega, cfg.model.omega},
                    {0.25, 1.75},
                    {0.0, M_PI}};
  if (j.contains("box")) {
    const auto& b = j.at("box");
    for (std::size_t d = 0; d < cfg.box.labels.size(); ++d)
      if (b.contains(cfg.box.labels[d])) {
        const auto r = b.at(cfg.box.labels[d]).get<std::vector<double>>();
        if (r.size() != 2)
          throw std::invalid_argument("box ranges must be [lo, hi]");
        cfg.box.ranges[d] = {r[0], r[1]};
      }
  }
  (void)c;

  cfg.seed = j.value("seed", 1);
  cfg.search_depth = j.value("search_depth", 3);
  cfg.restarts = j.value("restarts", 8);
  cfg.eig_tol = j.value("eig_tol", 1e-9);
  cfg.eval_omegas = j.value("eval_omegas", std::vector<double>{});
  cfg.lambda_lo = j.value("lambda_lo", cfg.box.ranges[1].first);
  cfg.lambda_hi = j.value("lambda_hi", cfg.box.ranges[1].second);
  cfg.lambda_sweep = j.value("lambda_sweep", 31);
  cfg.lambda_c_tol = j.value("lambda_c_tol", 0.005);
  cfg.solver_lambda_tol = j.value("solver_lambda_tol", 0.02);
  cfg.compare_solver = j.value("compare_solver", false);
  cfg.bandwidth_omegas = j.value("bandwidth_omegas", std::vector<double>{});
  cfg.bandwidth_lambdas = j.value("bandwidth_lambdas", std::vector<double>{});
  cfg.bandwidth_tol = j.value("bandwidth_tol", 0.05);
  cfg.k_lo = j.value("k_lo", cfg.box.ranges[2].first);
  cfg.k_hi = j.value("k_hi", cfg.box.ranges[2].second);
  cfg.mc_samples = j.value("mc_samples", 100);
  cfg.out_dir = j.value("out_dir", std::string("out"));
  cfg.dataset_csv = j.value("dataset_csv", std::string());
  cfg.scan_lo = j.value("scan_lo", 0.3);
  cfg.scan_hi = j.value("scan_hi", 1.2);
  cfg.sweep_points = j.value("sweep_points", 0);
  return cfg;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["kind"] = kind;
  j["model"] = params_to_json(model);
  j["fidelities"] = nlohmann::json::array();
  for (const auto& f : fidelities)
    j["fidelities"].push_back({{"M", f.spec.cloud_extent},
                               {"N", f.spec.max_phonons},
                               {"samples", f.samples}});
  j["box"] = {{"omega", {box.ranges[0].first, box.ranges[0].second}},
              {"lambda_ssh", {box.ranges[1].first, box.ranges[1].second}},
              {"k", {box.ranges[2].first, box.ranges[2].second}}};
  j["seed"] = seed;
  j["search_depth"] = search_depth;
  j["restarts"] = restarts;
  j["eig_tol"] = eig_tol;
  j["eval_omegas"] = eval_omegas;
  j["lambda_lo"] = lambda_lo;
  j["lambda_hi"] = lambda_hi;
  j["lambda_sweep"] = lambda_sweep;
  j["lambda_c_tol"] = lambda_c_tol;
  j["solver_lambda_tol"] = solver_lambda_tol;
  j["compare_solver"] = compare_solver;
  j["bandwidth_omegas"] = bandwidth_omegas;
  j["bandwidth_lambdas"] = bandwidth_lambdas;
  j["bandwidth_tol"] = bandwidth_tol;
  j["k_lo"] = k_lo;
  j["k_hi"] = k_hi;
  j["mc_samples"] = mc_samples;
  j["out_dir"] = out_dir;
  if (!dataset_csv.empty()) j["dataset_csv"] = dataset_csv;
  j["scan_lo"] = scan_lo;
  j["scan_hi"] = scan_hi;
  j["sweep_points"] = sweep_points;
  return j;
}

BandwidthResult bandwidth_check(const DispersionCurve& curve, double omega,
                                double tol) {
  double spread = 0.0;
  for (double e : curve.energies)
    spread = std::max(spread, std::abs(e - curve.energies.front()));
  BandwidthResult r;
  r.bandwidth = spread;
  r.margin = omega - spread;
  r.pass = spread <= omega + tol;
  return r;
}

std::vector<double> momentum_grid(int ring_size, double k_lo, double k_hi) {
  const double step = 2.0 * M_PI / ring_size;
  const int m_lo = std::max(0, (int)std::ceil(k_lo / step - 1e-9));
  const int m_hi = std::min(ring_size / 2, (int)std::floor(k_hi / step + 1e-9));
  std::vector<double> grid;
  for (int m = m_lo; m <= m_hi; ++m) grid.push_back(m * step);
  if (grid.size() < 5)
    throw std::invalid_argument("momentum_grid: fewer than 5 momenta in range");
  return grid;
}

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i)
    v[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return v;
}

double kgs_at(const DispersionEvaluator& eval, double omega, double lambda,
              const std::vector<double>& k_grid) {
  DispersionCurve curve;
  curve.k_grid = k_grid;
  curve.energies = eval(omega, lambda, k_grid);
  return ground_state_momentum(curve);
}

}  // namespace

TransitionPoint transition_scan(const DispersionEvaluator& eval, double omega,
                                const std::vector<double>& lambda_grid,
                                const std::vector<double>& k_grid,
                                double tol) {
  TransitionPoint point;
  point.omega = omega;
  const double threshold = k_grid[1] - k_grid[0];

  std::vector<bool> above(lambda_grid.size());
  for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
    const double kgs = kgs_at(eval, omega, lambda_grid[i], k_grid);
    point.kgs_table.emplace_back(lambda_grid[i], kgs);
    above[i] = kgs > threshold;
  }

  std::size_t flip = lambda_grid.size();
  for (std::size_t i = 0; i + 1 < lambda_grid.size(); ++i)
    if (!above[i] && above[i + 1]) {
      flip = i;
      break;
    }
  if (flip == lambda_grid.size()) return point;  // transition not bracketed

  double lo = lambda_grid[flip], hi = lambda_grid[flip + 1];
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (kgs_at(eval, omega, mid, k_grid) > threshold ? hi : lo) = mid;
  }
  point.bracketed = true;
  point.lambda_c = 0.5 * (lo + hi);
  return point;
}

std::vector<TransitionPoint> surrogate_transition_curve(
    const gp::TrainedGP& surrogate, const std::vector<double>& omegas,
    const std::vector<double>& lambda_grid, const std::vector<double>& k_grid,
    double tol) {
  DispersionEvaluator eval = [&](double omega, double lambda,
                                 const std::vector<double>& ks) {
    std::vector<double> energies(ks.size());
    for (std::size_t i = 0; i < ks.size(); ++i) {
      Eigen::Vector3d x(omega, lambda, ks[i]);
      energies[i] = surrogate.predict_mean(x);
    }
    return energies;
  };
  std::vector<TransitionPoint> out;
  for (double omega : omegas)
    out.push_back(transition_scan(eval, omega, lambda_grid, k_grid, tol));
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

struct Manifest {
  nlohmann::json doc;
  fs::path dir;

  Manifest(const ExperimentConfig& cfg, const fs::path& out) : dir(out) {
    const nlohmann::json echo = cfg.to_json();
    doc["config"] = echo;
    char hex[20];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  (unsigned long long)fnv1a64(echo.dump()));
    doc["config_hash"] = hex;
    doc["version"] = kVersion;
    doc["seed"] = cfg.seed;
    doc["stages"] = nlohmann::json::array();
    doc["warnings"] = nlohmann::json::array();
    doc["outputs"] = nlohmann::json::array();
  }

  void warn(const std::string& msg) { doc["warnings"].push_back(msg); }

  void output(const std::string& name) { doc["outputs"].push_back(name); }

  void write() const {
    std::ofstream out(dir / "manifest.json");
    out << doc.dump(2) << '\n';
  }
};

// Runs one named stage; on failure the manifest records the partial state
// before the error propagates with the stage name attached.
template <class F>
void stage(Manifest& manifest, const std::string& name, F&& body) {
  const auto t0 = Clock::now();
  try {
    body();
  } catch (const std::exception& e) {
    manifest.doc["failed_stage"] = name;
    manifest.warn("stage " + name + " failed: " + e.what());
    manifest.write();
    throw std::runtime_error("stage " + name + ": " + e.what());
  }
  const double ms =
      std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  manifest.doc["stages"].push_back({{"name", name}, {"wall_ms", ms}});
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << text;
}

void write_json(Manifest& manifest, const std::string& name,
                const nlohmann::json& j) {
  write_text(manifest.dir / name, j.dump(2) + "\n");
  manifest.output(name);
}

struct PredictionWriter {
  std::ofstream out;
  explicit PredictionWriter(const fs::path& path) : out(path) {
    out << "omega,lambda_ssh,k,mean,variance\n";
  }
  void row(double omega, double lambda, double k, double mean, double var) {
    out << sig12(omega) << ',' << sig12(lambda) << ',' << sig12(k) << ','
        << sig12(mean) << ',' << sig12(var) << '\n';
  }
};

void write_transitions_csv(const fs::path& path,
                           const std::vector<TransitionPoint>& points,
                           double tol) {
  std::ofstream out(path);
  out << "omega,lambda_c,tol\n";
  for (const auto& p : points) {
    out << sig12(p.omega) << ',';
    if (p.bracketed) out << sig12(p.lambda_c);
    out << ',' << sig12(tol) << '\n';
  }
}

void write_kgs_csv(const fs::path& path,
                   const std::vector<TransitionPoint>& points) {
  std::ofstream out(path);
  out << "omega,lambda_ssh,K_GS\n";
  for (const auto& p : points)
    for (const auto& [lambda, kgs] : p.kgs_table)
      out << sig12(p.omega) << ',' << sig12(lambda) << ',' << sig12(kgs)
          << '\n';
}

nlohmann::json standardization_entry(const std::string& name,
                                     const gp::TrainedGP& model) {
  return {{"name", name},
          {"input_lo", std::vector<double>(model.input_lo.data(),
                                           model.input_lo.data() +
                                               model.input_lo.size())},
          {"input_span", std::vector<double>(model.input_span.data(),
                                             model.input_span.data() +
                                                 model.input_span.size())},
          {"target_mean", model.target_mean}};
}

nlohmann::json transition_json(const TransitionPoint& p, double tol) {
  nlohmann::json j;
  j["omega"] = p.omega;
  j["bracketed"] = p.bracketed;
  if (p.bracketed) j["lambda_c"] = p.lambda_c;
  j["tol"] = tol;
  return j;
}

nlohmann::json run_extrapolate(const ExperimentConfig& cfg,
                               Manifest& manifest) {
  nlohmann::json summary;
  SolverOptions sopt;
  sopt.eig_tol = cfg.eig_tol;

  DataTable table;
  stage(manifest, "dataset", [&] {
    table = generate_dataset(cfg.model, cfg.fidelities.front().spec,
                             cfg.fidelities.front().samples, cfg.box,
                             cfg.seed, sopt);
    table.config_hash = manifest.doc["config_hash"];
    table.code_version = kVersion;
    write_csv(table, manifest.dir / "dataset.csv");
    manifest.output("dataset.csv");
  });

  gp::SearchResult search_result;
  stage(manifest, "train", [&] {
    search_result =
        gp::search(table.inputs(), table.targets(), cfg.search_depth,
                   cfg.restarts, mix_seed(cfg.seed, 1));
    for (const auto& w : search_result.warnings) manifest.warn(w);
    write_json(manifest, "model.json", search_result.best.fitted.to_json());
    write_json(manifest, "search_trace.json", search_result.trace);
    manifest.doc["kernel_structure"] = search_result.best.structure;
    summary["kernel_structure"] = search_result.best.structure;
    summary["bic"] = search_result.best.bic;
    summary["lml"] = search_result.best.lml;
  });
  const gp::TrainedGP& model = search_result.best.fitted;
  manifest.doc["models"] =
      nlohmann::json::array({standardization_entry("surrogate", model)});

  const std::vector<double> k_grid =
      momentum_grid(cfg.model.ring_size, cfg.k_lo, cfg.k_hi);
  const std::vector<double> lambda_grid =
      linspace(cfg.lambda_lo, cfg.lambda_hi, cfg.lambda_sweep);

  stage(manifest, "predict", [&] {
    PredictionWriter pw(manifest.dir / "predictions.csv");
    for (double omega : cfg.eval_omegas)
      for (double lambda : lambda_grid)
        for (double k : k_grid) {
          const auto [mean, var] = model.predict(Eigen::Vector3d(omega, lambda, k));
          pw.row(omega, lambda, k, mean, var);
        }
    manifest.output("predictions.csv");
  });

  std::vector<TransitionPoint> transitions;
  stage(manifest, "transitions", [&] {
    transitions = surrogate_transition_curve(model, cfg.eval_omegas,
                                             lambda_grid, k_grid,
                                             cfg.lambda_c_tol);
    write_transitions_csv(manifest.dir / "transitions.csv", transitions,
                          cfg.lambda_c_tol);
    write_kgs_csv(manifest.dir / "kgs.csv", transitions);
    manifest.output("transitions.csv");
    manifest.output("kgs.csv");
    summary["transitions"] = nlohmann::json::array();
    for (const auto& p : transitions)
      summary["transitions"].push_back(transition_json(p, cfg.lambda_c_tol));
  });

  if (cfg.compare_solver) {
    stage(manifest, "solver_check", [&] {
      const BasisSpec ref_spec = cfg.fidelities.back().spec;
      summary["solver_check"] = nlohmann::json::array();
      std::ofstream out(manifest.dir / "transition_check.csv");
      out << "omega,lambda_c_surrogate,lambda_c_solver,abs_diff\n";
      for (const auto& p : transitions) {
        if (!p.bracketed) continue;
        ModelParams tmpl = cfg.model;
        tmpl.omega = p.omega;
        const double solver_lc =
            find_lambda_c(tmpl, ref_spec, cfg.lambda_lo, cfg.lambda_hi,
                          cfg.solver_lambda_tol, sopt);
        out << sig12(p.omega) << ',' << sig12(p.lambda_c) << ','
            << sig12(solver_lc) << ',' << sig12(std::abs(p.lambda_c - solver_lc))
            << '\n';
        summary["solver_check"].push_back(
            {{"omega", p.omega},
             {"lambda_c_surrogate", p.lambda_c},
             {"lambda_c_solver", solver_lc},
             {"abs_diff", std::abs(p.lambda_c - solver_lc)}});
      }
      manifest.output("transition_check.csv");
    });
  }

  if (!cfg.bandwidth_omegas.empty()) {
    stage(manifest, "bandwidth", [&] {
      std::ofstream out(manifest.dir / "bandwidth.csv");
      out << "omega,lambda_ssh,bandwidth,bound,margin,pass\n";
      summary["bandwidth"] = nlohmann::json::array();
      for (double omega : cfg.bandwidth_omegas)
        for (double lambda : cfg.bandwidth_lambdas) {
          DispersionCurve curve;
          curve.k_grid = k_grid;
          for (double k : k_grid)
            curve.energies.push_back(
                model.predict_mean(Eigen::Vector3d(omega, lambda, k)));
          const BandwidthResult br =
              bandwidth_check(curve, omega, cfg.bandwidth_tol);
          out << sig12(omega) << ',' << sig12(lambda) << ','
              << sig12(br.bandwidth) << ',' << sig12(omega) << ','
              << sig12(br.margin) << ',' << (br.pass ? "1" : "0") << '\n';
          summary["bandwidth"].push_back({{"omega", omega},
                                          {"lambda_ssh", lambda},
                                          {"bandwidth", br.bandwidth},
                                          {"margin", br.margin},
                                          {"pass", br.pass}});
        }
      manifest.output("bandwidth.csv");
    });
  }
  return summary;
}

nlohmann::json run_multifid(const ExperimentConfig& cfg, Manifest& manifest) {
  nlohmann::json summary;
  SolverOptions sopt;
  sopt.eig_tol = cfg.eig_tol;

  if (cfg.fidelities.size() < 2)
    throw std::invalid_argument("multifid: need at least 2 fidelity levels");
  if (cfg.box.ranges[0].first != cfg.box.ranges[0].second)
    throw std::invalid_argument(
        "multifid: omega range must be pinned to the model omega");

  std::vector<mf::FidelityDataset> datasets;
  stage(manifest, "dataset", [&] {
    for (std::size_t t = 0; t < cfg.fidelities.size(); ++t) {
      DataTable table = generate_dataset(
          cfg.model, cfg.fidelities[t].spec, cfg.fidelities[t].samples,
          cfg.box, mix_seed(cfg.seed, 100 + t), sopt);
      table.config_hash = manifest.doc["config_hash"];
      table.code_version = kVersion;
      const std::string name = "dataset_level" + std::to_string(t) + ".csv";
      write_csv(table, manifest.dir / name);
      manifest.output(name);
      datasets.push_back(mf::FidelityDataset{static_cast<int>(t),
                                             cfg.fidelities[t].spec,
                                             table.inputs({1, 2}),
                                             table.targets()});
    }
  });

  mf::NargpStack stack;
  gp::TrainedGP direct;
  stage(manifest, "train", [&] {
    stack = mf::fit_stack(datasets, cfg.restarts, mix_seed(cfg.seed, 2));
    stack.mc_samples = cfg.mc_samples;
    direct = gp::fit(gp::KernelExpr::leaf(gp::BaseKernel::Matern52, 2),
                     datasets.back().inputs, datasets.back().targets,
                     cfg.restarts, mix_seed(cfg.seed, 3));
    write_json(manifest, "stack.json", stack.to_json());
    write_json(manifest, "model_direct.json", direct.to_json());
    manifest.doc["kernel_structure"] = "(M52*M52)+M52";
  });
  manifest.doc["models"] = nlohmann::json::array(
      {standardization_entry("stack_low", stack.levels.front()),
       standardization_entry("stack_top", stack.levels.back()),
       standardization_entry("direct", direct)});

  const std::vector<double> k_grid =
      momentum_grid(cfg.model.ring_size, cfg.k_lo, cfg.k_hi);
  const std::vector<double> lambda_grid =
      linspace(cfg.lambda_lo, cfg.lambda_hi, cfg.lambda_sweep);
  const double omega = cfg.model.omega;

  DispersionEvaluator stack_eval = [&](double, double lambda,
                                       const std::vector<double>& ks) {
    std::vector<double> e(ks.size());
    for (std::size_t i = 0; i < ks.size(); ++i)
      e[i] = stack.predict(Eigen::Vector2d(lambda, ks[i])).first;
    return e;
  };
  DispersionEvaluator direct_eval = [&](double, double lambda,
                                        const std::vector<double>& ks) {
    std::vector<double> e(ks.size());
    for (std::size_t i = 0; i < ks.size(); ++i)
      e[i] = direct.predict_mean(Eigen::Vector2d(lambda, ks[i]));
    return e;
  };
  DispersionEvaluator low_eval = [&](double, double lambda,
                                     const std::vector<double>& ks) {
    std::vector<double> e(ks.size());
    for (std::size_t i = 0; i < ks.size(); ++i)
      e[i] = stack.levels.front().predict_mean(Eigen::Vector2d(lambda, ks[i]));
    return e;
  };

  stage(manifest, "predict", [&] {
    PredictionWriter stack_pw(manifest.dir / "predictions_stack.csv");
    PredictionWriter direct_pw(manifest.dir / "predictions_direct.csv");
    PredictionWriter low_pw(manifest.dir / "predictions_low.csv");
    for (double lambda : lambda_grid)
      for (double k : k_grid) {
        const Eigen::Vector2d x(lambda, k);
        const auto [sm, sv] = stack.predict(x);
        stack_pw.row(omega, lambda, k, sm, sv);
        const auto [dm, dv] = direct.predict(x);
        direct_pw.row(omega, lambda, k, dm, dv);
        const auto [lm, lv] = stack.levels.front().predict(x);
        low_pw.row(omega, lambda, k, lm, lv);
      }
    manifest.output("predictions_stack.csv");
    manifest.output("predictions_direct.csv");
    manifest.output("predictions_low.csv");
  });

  stage(manifest, "transitions", [&] {
    const TransitionPoint ts =
        transition_scan(stack_eval, omega, lambda_grid, k_grid, cfg.lambda_c_tol);
    const TransitionPoint td = transition_scan(direct_eval, omega, lambda_grid,
                                               k_grid, cfg.lambda_c_tol);
    const TransitionPoint tl =
        transition_scan(low_eval, omega, lambda_grid, k_grid, cfg.lambda_c_tol);
    write_transitions_csv(manifest.dir / "transitions.csv", {ts},
                          cfg.lambda_c_tol);
    write_kgs_csv(manifest.dir / "kgs_stack.csv", {ts});
    write_kgs_csv(manifest.dir / "kgs_direct.csv", {td});
    write_kgs_csv(manifest.dir / "kgs_low.csv", {tl});
    manifest.output("transitions.csv");
    summary["stack"] = transition_json(ts, cfg.lambda_c_tol);
    summary["direct"] = transition_json(td, cfg.lambda_c_tol);
    summary["low_fidelity"] = transition_json(tl, cfg.lambda_c_tol);
  });

  stage(manifest, "reference", [&] {
    // Converged solver dispersions on a coarse lambda set; the yardstick for
    // both surrogates.
    const BasisSpec ref_spec = cfg.fidelities.back().spec;
    SolverContext ctx(ref_spec, cfg.model.ring_size);
    const std::vector<double> ref_lambdas =
        linspace(cfg.lambda_lo, cfg.lambda_hi, 7);
    DataTable ref;
    const CouplingPoint base = to_dimensionless(cfg.model);
    const int nk = static_cast<int>(k_grid.size());
    const int total = static_cast<int>(ref_lambdas.size()) * nk;
    ref.rows.resize(total);
    SolverOptions point_opt = sopt;
    point_opt.parallel = false;
#pragma omp parallel for schedule(dynamic)
    for (int idx = 0; idx < total; ++idx) {
      const double lambda = ref_lambdas[idx / nk];
      const double k = k_grid[idx % nk];
      const ModelParams p = from_dimensionless(
          {lambda, base.lambda_h, 0.0}, cfg.model.t, omega,
          cfg.model.ring_size);
      DataRow r;
      r.omega = omega;
      r.lambda_ssh = lambda;
      r.lambda_h = base.lambda_h;
      r.k = k;
      r.energy = ctx.ground_energy(p, k, point_opt);
      r.cloud_extent = ref_spec.cloud_extent;
      r.max_phonons = ref_spec.max_phonons;
      ref.rows[idx] = r;
    }
    write_csv(ref, manifest.dir / "reference.csv");
    manifest.output("reference.csv");

    double se_stack = 0.0, se_direct = 0.0;
    for (const auto& r : ref.rows) {
      const Eigen::Vector2d x(r.lambda_ssh, r.k);
      se_stack += std::pow(stack.predict(x).first - r.energy, 2);
      se_direct += std::pow(direct.predict_mean(x) - r.energy, 2);
    }
    summary["rmse_stack"] = std::sqrt(se_stack / ref.rows.size());
    summary["rmse_direct"] = std::sqrt(se_direct / ref.rows.size());
  });

  return summary;
}

nlohmann::json run_scan(const ExperimentConfig& cfg, Manifest& manifest) {
  nlohmann::json summary;
  SolverOptions sopt;
  sopt.eig_tol = cfg.eig_tol;
  const BasisSpec spec = cfg.fidelities.front().spec;
  SolverContext ctx(spec, cfg.model.ring_size);
  const int k_count = cfg.model.ring_size / 2 + 1;

  stage(manifest, "sweep", [&] {
    const int n = cfg.sweep_points > 0 ? cfg.sweep_points : 25;
    std::ofstream out(manifest.dir / "scan.csv");
    out << "lambda_ssh,K_GS,inv_mass\n";
    for (double lambda : linspace(cfg.scan_lo, cfg.scan_hi, n)) {
      const DispersionCurve curve =
          ctx.dispersion(with_lambda_ssh(cfg.model, lambda), k_count, sopt);
      out << sig12(lambda) << ',' << sig12(curve.k_gs) << ','
          << sig12(curve.inv_mass) << '\n';
    }
    manifest.output("scan.csv");
  });

  stage(manifest, "bisection", [&] {
    const double lc = find_lambda_c(cfg.model, spec, cfg.scan_lo, cfg.scan_hi,
                                    cfg.solver_lambda_tol, sopt);
    summary["lambda_c"] = lc;
    summary["tol"] = cfg.solver_lambda_tol;
  });
  return summary;
}

nlohmann::json run_sample(const ExperimentConfig& cfg, Manifest& manifest) {
  nlohmann::json summary;
  stage(manifest, "design", [&] {
    const Eigen::MatrixXd design =
        lhs_sample(cfg.fidelities.front().samples, cfg.box, cfg.seed);
    std::ofstream out(manifest.dir / "design.csv");
    out << "omega,lambda_ssh,k\n";
    for (Eigen::Index i = 0; i < design.rows(); ++i)
      out << sig12(design(i, 0)) << ',' << sig12(design(i, 1)) << ','
          << sig12(design(i, 2)) << '\n';
    manifest.output("design.csv");
    summary["samples"] = design.rows();
  });
  return summary;
}

nlohmann::json run_train(const ExperimentConfig& cfg, Manifest& manifest) {
  nlohmann::json summary;
  SolverOptions sopt;
  sopt.eig_tol = cfg.eig_tol;

  DataTable table;
  stage(manifest, "dataset", [&] {
    if (!cfg.dataset_csv.empty()) {
      table = read_csv(cfg.dataset_csv);
    } else {
      table = generate_dataset(cfg.model, cfg.fidelities.front().spec,
                               cfg.fidelities.front().samples, cfg.box,
                               cfg.seed, sopt);
      write_csv(table, manifest.dir / "dataset.csv");
      manifest.output("dataset.csv");
    }
  });

  stage(manifest, "train", [&] {
    gp::SearchResult sr =
        gp::search(table.inputs(), table.targets(), cfg.search_depth,
                   cfg.restarts, mix_seed(cfg.seed, 1));
    for (const auto& w : sr.warnings) manifest.warn(w);
    write_json(manifest, "model.json", sr.best.fitted.to_json());
    write_json(manifest, "search_trace.json", sr.trace);
    manifest.doc["kernel_structure"] = sr.best.structure;
    manifest.doc["models"] = nlohmann::json::array(
        {standardization_entry("surrogate", sr.best.fitted)});
    summary["kernel_structure"] = sr.best.structure;
    summary["bic"] = sr.best.bic;
    summary["lml"] = sr.best.lml;
    summary["params"] = sr.best.kernel.parameter_count();
  });
  return summary;
}

}  // namespace

nlohmann::json run_experiment(const ExperimentConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  Manifest manifest(cfg, cfg.out_dir);

  nlohmann::json summary;
  if (cfg.kind == "extrapolate")
    summary = run_extrapolate(cfg, manifest);
  else if (cfg.kind == "multifid")
    summary = run_multifid(cfg, manifest);
  else if (cfg.kind == "scan")
    summary = run_scan(cfg, manifest);
  else if (cfg.kind == "sample")
    summary = run_sample(cfg, manifest);
  else if (cfg.kind == "train")
    summary = run_train(cfg, manifest);
  else
    throw std::invalid_argument("run_experiment: unknown kind " + cfg.kind);

  write_json(manifest, "summary.json", summary);
  manifest.write();
  return summary;
}

}  // namespace polaron::harness

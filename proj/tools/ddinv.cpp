// Command-line front end: simulate-data, synthesize, verify, sweep,
// platoon-demo. Exit codes: 0 feasible/pass, 1 infeasible/fail, 2 error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ddinv/config.hpp"
#include "ddinv/dataset.hpp"
#include "ddinv/io.hpp"
#include "ddinv/platoon.hpp"
#include "ddinv/sweep.hpp"
#include "ddinv/synthesis.hpp"
#include "ddinv/verify.hpp"

namespace fs = std::filesystem;
using namespace ddinv;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNegative = 1;
constexpr int kExitError = 2;

/// An error tagged with the stage that raised it.
struct StageError : std::runtime_error {
  StageError(const std::string& stage, const std::string& what)
      : std::runtime_error(fmt::format("{}: {}", stage, what)) {}
};

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

struct CommonArgs {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<double> delta;
  std::optional<long> T;
  std::optional<std::string> formulation;
  std::string result;
};

void add_common(CLI::App* cmd, CommonArgs& a, bool with_result = false) {
  cmd->add_option("--config", a.config, "JSON run configuration");
  cmd->add_option("--out", a.out, "output directory")->capture_default_str();
  cmd->add_option("--seed", a.seed, "64-bit seed of the random generator");
  cmd->add_option("--jobs", a.jobs, "worker threads");
  cmd->add_option("--delta", a.delta, "disturbance level");
  cmd->add_option("--T", a.T, "number of data samples");
  cmd->add_option("--formulation", a.formulation, "model, thm1 or thm2");
  if (with_result) cmd->add_option("--result", a.result, "directory written by synthesize")->required();
}

RunConfig load_config(const CommonArgs& a) {
  RunConfig cfg = a.config.empty() ? RunConfig{} : RunConfig::load(a.config);
  if (a.seed) cfg.seed = *a.seed;
  if (a.jobs) cfg.jobs = *a.jobs;
  if (a.delta) cfg.delta = *a.delta;
  if (a.T) cfg.T = *a.T;
  if (a.formulation) {
    parse_formulation(*a.formulation);
    cfg.formulation = *a.formulation;
  }
  cfg.absolutize();
  if (cfg.delta < 0.0) throw ParseError("--delta must be nonnegative");
  if (cfg.T < 1) throw ParseError("--T must be positive");
#ifdef _OPENMP
  if (cfg.jobs > 0) omp_set_num_threads(cfg.jobs);
#endif
  return cfg;
}

HPolyhedron read_polyhedron(const RunConfig& cfg, const PolyhedronFiles& f) {
  Matrix A = read_matrix_csv(cfg.resolve(f.A));
  Vector b = f.b ? read_vector_csv(cfg.resolve(*f.b)) : Vector::Ones(A.rows());
  if (b.size() != A.rows()) {
    throw ParseError(fmt::format("{}: {} entries for {} rows of {}", *f.b, b.size(), A.rows(), f.A));
  }
  return HPolyhedron(std::move(A), std::move(b));
}

/// System, S, D and input set from the config; the platoon model fills in
/// whatever is not given.
struct Setup {
  Matrix A;
  Matrix B;
  HPolyhedron S;
  DisturbanceSet dist;
  std::optional<HPolyhedron> input_set;
};

Setup load_setup(const RunConfig& cfg) {
  const PlatoonModel pm = make_platoon();
  Setup s{pm.A, pm.B, pm.S, {pm.D, cfg.delta}, std::nullopt};
  if (cfg.A) s.A = read_matrix_csv(cfg.resolve(*cfg.A));
  if (cfg.B) s.B = read_matrix_csv(cfg.resolve(*cfg.B));
  if (cfg.S) s.S = read_polyhedron(cfg, *cfg.S);
  if (cfg.D) s.dist.D = read_matrix_csv(cfg.resolve(*cfg.D));
  if (cfg.input_set) s.input_set = read_polyhedron(cfg, *cfg.input_set);
  if (s.A.rows() != s.A.cols() || s.B.rows() != s.A.rows()) {
    throw ParseError(fmt::format("A is {}x{} and B is {}x{}", s.A.rows(), s.A.cols(), s.B.rows(), s.B.cols()));
  }
  return s;
}

Vector initial_state(const RunConfig& cfg, Eigen::Index n) {
  if (!cfg.x0) return Vector::Zero(n);
  if (static_cast<Eigen::Index>(cfg.x0->size()) != n) {
    throw ParseError(fmt::format("x0 has {} entries, expected {}", cfg.x0->size(), n));
  }
  return Eigen::Map<const Vector>(cfg.x0->data(), n);
}

/// Generates a dataset per the config and writes it under `dir`.
fs::path generate_and_write(const RunConfig& cfg, const Setup& s, const fs::path& dir) {
  const ExperimentData data = generate_experiment(
      s.A, s.B, initial_state(cfg, s.A.rows()), cfg.T, cfg.seed, cfg.input_low, cfg.input_high,
      s.dist, cfg.disturbance_mode == "vertex");
  DatasetManifest man;
  man.seed = cfg.seed;
  man.delta = cfg.delta;
  man.generation_mode = cfg.disturbance_mode;
  const fs::path manifest = dir / "manifest.json";
  write_dataset(manifest, data, man);
  return manifest;
}

int status_exit(SynthesisStatus s) {
  switch (s) {
    case SynthesisStatus::kFeasible: return kExitOk;
    case SynthesisStatus::kInfeasible: return kExitNegative;
    default: return kExitError;
  }
}

void print_result(const char* label, const SynthesisResult& r) {
  fmt::print("{}: {} (formulation {}, delta {}, vars {}, solve {:.2f}s{})\n", label,
             to_string(r.status), to_string(r.formulation), r.delta, r.diagnostics.num_vars,
             r.diagnostics.solve_seconds,
             r.feasible() ? fmt::format(", {} certificates pass", r.certificates.size()) : "");
  if (r.status == SynthesisStatus::kSolverFailure) fmt::print("  {}\n", r.diagnostics.message);
}

int cmd_simulate_data(const CommonArgs& a) {
  const RunConfig cfg = stage("config", [&] { return load_config(a); });
  const Setup s = stage("setup", [&] { return load_setup(cfg); });
  const fs::path out(a.out);
  const fs::path manifest = stage("simulate-data", [&] { return generate_and_write(cfg, s, out); });
  write_json(out / "config.json", cfg.to_json());
  fmt::print("wrote {} (T={}, delta={}, seed={})\n", manifest.string(), cfg.T, cfg.delta, cfg.seed);
  return kExitOk;
}

SynthesisResult run_synthesis(RunConfig& cfg, const Setup& s, const fs::path& out) {
  const Formulation f = parse_formulation(cfg.formulation);
  const SynthesisOptions opt = cfg.synthesis_options();
  if (f == Formulation::kModelBased) {
    return stage("synthesize", [&] {
      return synthesize_model_based(s.A, s.B, s.S, s.dist, s.input_set, opt);
    });
  }
  if (!cfg.data) {
    const fs::path manifest = stage("simulate-data", [&] { return generate_and_write(cfg, s, out / "data"); });
    cfg.data = fs::absolute(manifest).string();
  }
  const ExperimentData data = stage("data", [&] { return read_dataset(cfg.resolve(*cfg.data)); });
  if (f == Formulation::kThm1) {
    return stage("synthesize", [&] { return synthesize_thm1(data, s.S, s.dist, s.input_set, opt); });
  }
  const VPolytope verts = stage("consistency set", [&] {
    const ConsistencySet vt = build_consistency_set(data, s.dist, true, opt.redundancy);
    if (!is_bounded_general(vt.H, opt.lp)) {
      throw std::invalid_argument(
          "V_T is unbounded (needs rank(W0) = n+m and a disturbance set with full column rank); "
          "the vertex formulation requires a bounded V_T");
    }
    return enumerate_vertices(vt.H, opt.vertices);
  });
  return stage("synthesize", [&] {
    return synthesize_thm2(verts, data.n(), data.m(), s.S, s.dist, s.input_set, opt);
  });
}

int cmd_synthesize(const CommonArgs& a) {
  RunConfig cfg = stage("config", [&] { return load_config(a); });
  const Setup s = stage("setup", [&] { return load_setup(cfg); });
  const fs::path out(a.out);
  const SynthesisResult r = run_synthesis(cfg, s, out);
  write_synthesis_result(out, r, cfg.to_json());
  print_result("synthesize", r);
  return status_exit(r.status);
}

/// Re-verifies a stored result against problems rebuilt from its config.
int cmd_verify(const CommonArgs& a) {
  const fs::path dir(a.result);
  const Json stored = stage("result", [&] { return read_json(dir / "result.json"); });
  RunConfig cfg = stage("config", [&] {
    if (!a.config.empty()) return load_config(a);
    RunConfig c = RunConfig::from_json(stored.at("config"), dir);
    CommonArgs overrides = a;
    overrides.config.clear();
    if (overrides.seed) c.seed = *overrides.seed;
    return c;
  });
  cfg.delta = stored.at("delta").get<double>();
  const Setup s = stage("setup", [&] { return load_setup(cfg); });
  const std::string status = stored.at("status").get<std::string>();
  Json report{{"result", dir.string()}, {"stored_status", status}};
  if (status != "feasible") {
    fmt::print("verify: stored result is {}, nothing to verify\n", status);
    report["passed"] = false;
    write_json(fs::path(a.out) / "verify.json", report);
    return kExitNegative;
  }
  const Matrix K = stage("result", [&] { return read_matrix_csv(dir / "K.csv"); });
  const Formulation f = parse_formulation(stored.at("formulation").get<std::string>());

  std::optional<ExperimentData> data;
  std::optional<HPolyhedron> vt_rows;
  if (f != Formulation::kModelBased) {
    data = stage("data", [&] { return read_dataset(cfg.resolve(cfg.data.value())); });
    HPolyhedron full = stacked_consistency_rows(*data, s.dist);
    if (stored.contains("vt_row_map_file")) {
      const Vector map = read_vector_csv(dir / stored["vt_row_map_file"].get<std::string>());
      std::vector<Eigen::Index> rows;
      for (Eigen::Index k = 0; k < map.size(); ++k) rows.push_back(static_cast<Eigen::Index>(map(k)));
      vt_rows = full.select_rows(rows);
    } else {
      vt_rows = std::move(full);
    }
  }

  bool all_pass = true;
  Json certs = Json::array();
  stage("certificates", [&] {
    for (const Json& c : stored.at("certificates")) {
      const std::string kind = c.at("kind").get<std::string>();
      const std::vector<double> pt = c.at("point").get<std::vector<double>>();
      const Vector point = Eigen::Map<const Vector>(pt.data(), static_cast<Eigen::Index>(pt.size()));
      ContainmentProblem prob;
      if (kind == "model") {
        prob = model_containment_problem(s.A, s.B, K, s.S, s.dist);
      } else if (kind == "model_vertex") {
        const Eigen::Index n = K.cols(), m = K.rows();
        const Matrix V = unvec(point, n, n + m);
        prob = model_containment_problem(V.leftCols(n), V.rightCols(m), K, s.S, s.dist);
      } else if (kind == "state_vertex") {
        prob = thm1_vertex_problem(point, K, s.S, s.dist, *vt_rows);
      } else if (kind == "input") {
        prob = input_containment_problem(K, s.input_set.value(), s.S);
      } else {
        throw ParseError(fmt::format("unknown certificate kind '{}'", kind));
      }
      const FarkasCertificate E{read_matrix_csv(dir / c.at("file").get<std::string>())};
      const CertificateReport rep = verify_certificate(prob, E, cfg.certificate_tol);
      all_pass &= rep.passed;
      Json entry{{"kind", kind}, {"index", c.at("index")}, {"report", rep.to_json()}};
      certs.push_back(std::move(entry));
    }
    return 0;
  });
  report["certificates"] = certs;

  // Independent invariance check with the stored gain.
  stage("invariance check", [&] {
    if (f == Formulation::kModelBased) {
      const InvarianceResult inv = check_invariance_exact(s.A, s.B, K, s.S, s.dist);
      report["invariance"] = Json{{"mode", "exact"}, {"passed", inv.invariant}};
      all_pass &= inv.invariant;
    } else {
      const ConsistencySet vt{*vt_rows, data->n(), data->m(), data->T(), {}, false};
      const ModelCheckReport mc =
          cfg.model_check == "vertices"
              ? check_invariance_consistent_models_vertices(K, vt, s.S, s.dist)
              : check_invariance_consistent_models_samples(K, vt, s.S, s.dist, cfg.model_samples, cfg.seed);
      report["invariance"] = mc.to_json();
      all_pass &= mc.passed();
    }
    return 0;
  });
  report["passed"] = all_pass;
  write_json(fs::path(a.out) / "verify.json", report);
  fmt::print("verify: {} ({} certificates, invariance {})\n", all_pass ? "pass" : "FAIL",
             certs.size(), report["invariance"].value("passed", false) ? "pass" : "FAIL");
  return all_pass ? kExitOk : kExitNegative;
}

int cmd_sweep(const CommonArgs& a) {
  const RunConfig cfg = stage("config", [&] { return load_config(a); });
  SweepConfig sc = cfg.sweep_config();
  if (a.T) sc.T_grid = {*a.T};
  if (a.delta) sc.delta_grid = {*a.delta};
  if (a.seed) sc.seeds = {*a.seed};
  const std::vector<SweepCell> cells = stage("sweep", [&] { return run_sweep(sc); });
  const fs::path out(a.out);
  write_sweep_csv(out / "sweep.csv", cells);
  Json summary = Json::array();
  for (auto T : sc.T_grid) {
    for (auto seed : sc.seeds) {
      const double best = max_feasible_delta(cells, T, seed);
      summary.push_back(Json{{"T", T}, {"seed", seed}, {"max_feasible_delta", best < 0 ? Json(nullptr) : Json(best)}});
      fmt::print("T={} seed={}: max feasible delta {}\n", T, seed, best < 0 ? "none" : fmt::format("{}", best));
    }
  }
  write_json(out / "sweep_summary.json", Json{{"cells", cells.size()}, {"max_feasible", summary}, {"config", cfg.to_json()}});
  return kExitOk;
}

int cmd_platoon_demo(const CommonArgs& a) {
  RunConfig cfg = stage("config", [&] { return load_config(a); });
  const fs::path out(a.out);
  const PlatoonModel pm = make_platoon();
  const Setup s{pm.A, pm.B, pm.S, {pm.D, cfg.delta}, std::nullopt};
  write_matrix_csv(out / "system" / "A.csv", pm.A);
  write_matrix_csv(out / "system" / "B.csv", pm.B);
  write_matrix_csv(out / "system" / "S.csv", pm.S.A());
  write_matrix_csv(out / "system" / "D.csv", pm.D);
  const SynthesisOptions opt = cfg.synthesis_options();
  Json summary{{"T", cfg.T}, {"delta", cfg.delta}, {"seed", cfg.seed}};

  const SynthesisResult mb = stage("model-based synthesis", [&] {
    return synthesize_model_based(pm.A, pm.B, pm.S, s.dist, std::nullopt, opt);
  });
  write_synthesis_result(out / "model_based", mb, cfg.to_json());
  print_result("model-based", mb);

  const fs::path manifest = stage("simulate-data", [&] { return generate_and_write(cfg, s, out / "data"); });
  cfg.data = fs::absolute(manifest).string();
  const ExperimentData data = read_dataset(manifest);
  const SynthesisResult db = stage("data-based synthesis", [&] {
    return synthesize_thm1(data, pm.S, s.dist, std::nullopt, opt);
  });
  RunConfig echo = cfg;
  echo.formulation = "thm1";
  write_synthesis_result(out / "thm1", db, echo.to_json());
  print_result("data-based", db);

  summary["model_based"] = Json{{"status", to_string(mb.status)}, {"certificates_passed", mb.certificates_passed}};
  summary["data_based"] = Json{{"status", to_string(db.status)},
                               {"certificates_passed", db.certificates_passed},
                               {"vt_rows_full", db.diagnostics.vt_rows_full},
                               {"vt_rows_used", db.diagnostics.vt_rows_used},
                               {"solve_seconds", db.diagnostics.solve_seconds}};

  bool sims_ok = true;
  const VPolytope verts = enumerate_vertices(pm.S);
  auto simulate_all = [&](const Matrix& K, const std::string& tag) {
    Json sims = Json::array();
    for (std::size_t j = 0; j < verts.size(); ++j) {
      const Trajectory tr = simulate_closed_loop(pm.A, pm.B, K, verts.vertices()[j], s.dist, cfg.steps,
                                                 DisturbancePolicy::vertex_random(cfg.seed + j), pm.S);
      tr.write_csv(out / "trajectories" / fmt::format("{}_vertex_{}.csv", tag, j));
      sims.push_back(Json{{"vertex", j},
                          {"first_exit_step", tr.first_exit_step ? Json(*tr.first_exit_step) : Json(nullptr)}});
      sims_ok &= !tr.first_exit_step.has_value();
    }
    return sims;
  };
  if (mb.feasible()) summary["model_based"]["simulations"] = simulate_all(*mb.K, "model_based");
  if (db.feasible()) {
    summary["data_based"]["simulations"] = simulate_all(*db.K, "thm1");
    const ConsistencySet vt = build_consistency_set(data, s.dist, false);
    const ModelCheckReport mc = stage("consistent-model check", [&] {
      return check_invariance_consistent_models_samples(*db.K, vt, pm.S, s.dist, cfg.model_samples, cfg.seed);
    });
    summary["data_based"]["model_check"] = mc.to_json();
    sims_ok &= mc.passed();
  }
  summary["checks_passed"] = sims_ok;
  summary["config"] = cfg.to_json();
  write_json(out / "summary.json", summary);
  fmt::print("simulations and model checks: {}\n", sims_ok ? "pass" : "FAIL");
  if (db.status == SynthesisStatus::kSolverFailure) return kExitError;
  if (!db.feasible()) return kExitNegative;
  return sims_ok ? kExitOk : kExitNegative;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust invariance from noisy data: LP synthesis with Farkas certificates"};
  app.require_subcommand(1);
  CommonArgs args;
  auto* demo = app.add_subcommand("platoon-demo", "model- and data-based synthesis on the two-vehicle platoon");
  auto* sweep = app.add_subcommand("sweep", "delta-T feasibility map of the data-based LP");
  auto* synth = app.add_subcommand("synthesize", "solve one synthesis LP");
  auto* simdata = app.add_subcommand("simulate-data", "generate an experiment dataset");
  auto* verify = app.add_subcommand("verify", "re-verify a stored synthesis result");
  add_common(demo, args);
  add_common(sweep, args);
  add_common(synth, args);
  add_common(simdata, args);
  add_common(verify, args, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }
  try {
    if (*demo) return cmd_platoon_demo(args);
    if (*sweep) return cmd_sweep(args);
    if (*synth) return cmd_synthesize(args);
    if (*simdata) return cmd_simulate_data(args);
    if (*verify) return cmd_verify(args);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
  return kExitError;
}

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ddinv/io.hpp"
#include "ddinv/synthesis.hpp"
#include "ddinv/sweep.hpp"

namespace ddinv {

/// Matrix A and optional right-hand side b (all ones when absent).
struct PolyhedronFiles {
  std::string A;
  std::optional<std::string> b;
};

/// Run configuration shared by all subcommands. Stored as JSON; matrices
/// are CSV files referenced by path (relative paths resolve against the
/// directory of the config file). See README for the key list.
struct RunConfig {
  std::filesystem::path base_dir = ".";

  std::uint64_t seed = 0;
  int jobs = 1;
  double delta = 0.05;
  Eigen::Index T = 1600;
  std::string formulation = "thm1";

  /// System matrices; the built-in platoon model when absent.
  std::optional<std::string> A;
  std::optional<std::string> B;
  std::optional<PolyhedronFiles> S;
  std::optional<std::string> D;
  std::optional<PolyhedronFiles> input_set;
  /// Dataset manifest (synthesize thm1/thm2).
  std::optional<std::string> data;
  std::optional<std::vector<double>> x0;

  /// Data generation.
  double input_low = -5.0;
  double input_high = 5.0;
  /// "box" (delta * uniform[-1, 1] per component) or "vertex".
  std::string disturbance_mode = "box";

  /// Synthesis options.
  std::string representation = "auto";
  bool margin = false;
  double certificate_tol = kDefaultCertificateTol;
  std::size_t max_variables = 10'000'000;
  Eigen::Index auto_minimize_above = 50;

  /// Simulation and verification.
  Eigen::Index steps = 1000;
  /// "samples" or "vertices".
  std::string model_check = "samples";
  std::size_t model_samples = 100;

  /// Sweep.
  std::vector<Eigen::Index> T_grid{600, 1000, 1600, 2000, 3000};
  std::vector<double> delta_grid = make_grid(0.0, 0.07, 0.0025);
  std::vector<std::uint64_t> seeds{0};
  /// "independent" or "nested".
  std::string data_policy = "independent";
  /// "grid" or "threshold".
  std::string sweep_mode = "grid";

  Json to_json() const;
  /// Throws ParseError naming the offending key. Unknown keys are errors.
  static RunConfig from_json(const Json& j, const std::filesystem::path& base_dir);
  static RunConfig load(const std::filesystem::path& path);

  SynthesisOptions synthesis_options() const;
  SweepConfig sweep_config() const;
  std::filesystem::path resolve(const std::string& p) const { return resolve_path(base_dir, p); }
  /// Rewrites every file path as an absolute path.
  void absolutize();
};

}  // namespace ddinv

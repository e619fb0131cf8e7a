#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ddinv/platoon.hpp"
#include "ddinv/synthesis.hpp"

namespace ddinv {

/// Platoon delta-T feasibility map for the data-based formulation.
struct SweepConfig {
  std::vector<Eigen::Index> T_grid;
  std::vector<double> delta_grid;
  std::vector<std::uint64_t> seeds;
  /// Nested: the dataset for (T, seed) is the length-T prefix of one
  /// stream per seed. Independent: every T gets its own stream.
  bool nested = false;
  /// Solve every grid cell, or locate the largest feasible grid delta per
  /// (T, seed) by bisection over grid indices (assumes feasibility is
  /// downward closed in delta).
  bool threshold_search = false;
  int jobs = 1;
  double input_bound = 5.0;
  PlatoonParams platoon;
  SynthesisOptions options;
};

struct SweepCell {
  Eigen::Index T = 0;
  double delta = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t data_seed = 0;
  std::string status;
  double solve_seconds = 0.0;
  double total_seconds = 0.0;
  std::string message;
};

/// Seed of the generator that produces the dataset of a cell.
std::uint64_t cell_data_seed(std::uint64_t seed, Eigen::Index T, bool nested);

/// Arithmetic grid start, start + step, ... up to stop (inclusive within
/// step/1000). Values are rounded to 12 decimals.
std::vector<double> make_grid(double start, double stop, double step);

/// Cells ordered by (T, seed, delta). Per-cell failures become status
/// "error" with the message; the sweep continues.
std::vector<SweepCell> run_sweep(const SweepConfig& config);

/// Largest feasible delta among the cells for (T, seed); negative when none.
double max_feasible_delta(const std::vector<SweepCell>& cells, Eigen::Index T, std::uint64_t seed);

/// Columns T, delta, seed, status, solve_seconds (plus data_seed,
/// total_seconds and message).
void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepCell>& cells);

}  // namespace ddinv

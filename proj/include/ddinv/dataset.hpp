#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ddinv/io.hpp"
#include "ddinv/linalg.hpp"
#include "ddinv/polyhedra.hpp"
#include "ddinv/random.hpp"

namespace ddinv {

/// Input-state data of one experiment. Column k of X1 is x(k+1), column k
/// of X0 is x(k).
struct ExperimentData {
  Matrix U0;
  Matrix X0;
  Matrix X1;
  /// True disturbances; only present for simulated data and never used by
  /// synthesis.
  std::optional<Matrix> D0;

  Eigen::Index n() const { return X0.rows(); }
  Eigen::Index m() const { return U0.rows(); }
  Eigen::Index T() const { return X0.cols(); }

  /// Throws std::invalid_argument on inconsistent shapes.
  void validate() const;

  /// First T columns.
  ExperimentData prefix(Eigen::Index T) const;
};

/// D_delta = {d : D d <= delta 1}.
struct DisturbanceSet {
  Matrix D;
  double delta = 0.0;

  Eigen::Index n() const { return D.cols(); }
  Eigen::Index n_d() const { return D.rows(); }
  HPolyhedron polyhedron() const;
  bool contains(const Vector& d, double tol = kDefaultMembershipTol) const;
};

/// {d : delta d_lower <= Dhat d <= delta d_upper}, d_lower < 0 < d_upper.
struct IntervalDisturbanceSet {
  Matrix Dhat;
  Vector d_lower;
  Vector d_upper;
  double delta = 0.0;

  void validate() const;
  /// Rows Dhat_k / d_upper_k and -Dhat_k / (-d_lower_k), interleaved per k.
  DisturbanceSet to_disturbance_set() const;
  TwoSidedPolyhedron polyhedron() const;
};

/// V_T in coordinates vec(V), V = [A B] of size n x (n+m), column-major.
struct ConsistencySet {
  HPolyhedron H;
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  Eigen::Index T = 0;
  /// H row k is row row_map[k] of the full stacked system (row i*n_d + r is
  /// row r of the block belonging to data column i).
  std::vector<Eigen::Index> row_map;
  bool minimized = false;

  bool contains_matrix(const Matrix& V, double tol = kDefaultMembershipTol) const;
};

ExperimentData simulate_experiment(const Matrix& A, const Matrix& B, const Vector& x0,
                                   const Matrix& inputs, const Matrix& disturbances);

/// [X0; U0].
Matrix assemble_W0(const ExperimentData& data);

struct RichnessReport {
  bool full_row_rank = false;
  Eigen::Index rank = 0;
};

RichnessReport richness_check(const ExperimentData& data, double rank_tol = kDefaultRankTol);

/// Stacked system -(w_i' kron D) vec(V) <= delta 1 - D x(i+1), i = 0..T-1.
HPolyhedron stacked_consistency_rows(const ExperimentData& data, const DisturbanceSet& dist);

ConsistencySet build_consistency_set(const ExperimentData& data, const DisturbanceSet& dist,
                                     bool minimize, const RedundancyOptions& options = {});

/// Rank test: rank(W0) = n+m and rank(Dhat) = n.
bool consistency_bounded(const ExperimentData& data, const IntervalDisturbanceSet& dist,
                         double rank_tol = kDefaultRankTol);

Matrix random_inputs(Eigen::Index m, Eigen::Index T, double lo, double hi, Rng& rng);
Matrix random_inputs(Eigen::Index m, Eigen::Index T, double lo, double hi, std::uint64_t seed);

/// Columns drawn uniformly from the vertices of the (bounded) set.
Matrix random_vertex_disturbances(const DisturbanceSet& dist, Eigen::Index T, Rng& rng);
Matrix random_vertex_disturbances(const DisturbanceSet& dist, Eigen::Index T, std::uint64_t seed);

/// Entries delta * u with u uniform on [-1, 1): for a fixed seed only the
/// scale changes with delta.
Matrix random_box_disturbances(Eigen::Index n, double delta, Eigen::Index T, Rng& rng);
Matrix random_box_disturbances(Eigen::Index n, double delta, Eigen::Index T, std::uint64_t seed);

/// Simulated experiment with random excitation. Each time step draws the m
/// inputs (uniform on [input_low, input_high)) and then the disturbance:
/// delta times uniform on [-1, 1) per component in box mode, or a uniformly
/// chosen vertex of D_delta in vertex mode. Because draws are interleaved
/// per step, the dataset of length T is the prefix of any longer dataset
/// with the same seed.
ExperimentData generate_experiment(const Matrix& A, const Matrix& B, const Vector& x0,
                                   Eigen::Index T, std::uint64_t seed, double input_low,
                                   double input_high, const DisturbanceSet& dist, bool vertex_mode);

/// Manifest describing a dataset on disk.
struct DatasetManifest {
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  Eigen::Index T = 0;
  std::optional<std::uint64_t> seed;
  std::optional<double> delta;
  std::string generation_mode = "external";
  std::string U0 = "U0.csv";
  std::string X0 = "X0.csv";
  std::string X1 = "X1.csv";
  std::optional<std::string> D0;

  Json to_json() const;
  static DatasetManifest from_json(const Json& j);
};

/// Writes U0/X0/X1 (and D0 when present) next to `manifest_path`.
void write_dataset(const std::filesystem::path& manifest_path, const ExperimentData& data,
                   DatasetManifest manifest);

/// Loads the matrices named by the manifest, relative to its directory.
/// D0 is never loaded.
ExperimentData read_dataset(const std::filesystem::path& manifest_path);

}  // namespace ddinv

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ddinv/dataset.hpp"
#include "ddinv/farkas.hpp"
#include "ddinv/polyhedra.hpp"

namespace ddinv {

inline constexpr double kSimulationContainmentTol = 1e-7;

/// Containment problem for F S + D_delta in S: A = blkdiag(S, D),
/// c = (b; delta 1), B = [S F, S], d = b.
ContainmentProblem invariance_problem(const Matrix& F, const HPolyhedron& S,
                                      const DisturbanceSet& dist);

struct InvarianceResult {
  bool invariant = false;
  /// Present when invariant.
  std::optional<FarkasCertificate> certificate;
  std::optional<CertificateReport> report;
};

/// Fact-1 test of (A + B K) x + d in S for all x in S, d in D_delta.
/// Throws SolverError on backend failure.
InvarianceResult check_invariance_exact(const Matrix& A, const Matrix& B, const Matrix& K,
                                        const HPolyhedron& S, const DisturbanceSet& dist,
                                        const LpOptions& lp_options = {},
                                        double tol = kDefaultCertificateTol);

/// Worst violation max (S (F x + d) - b) over vertices x of S and d of D.
struct WorstCase {
  double violation = 0.0;
  Vector state_vertex;
  Vector disturbance_vertex;
};
WorstCase worst_vertex_pair(const Matrix& F, const HPolyhedron& S, const DisturbanceSet& dist);

struct ModelCheckReport {
  std::string mode;
  std::size_t checked = 0;
  std::size_t violations = 0;
  /// Seed used in sample mode.
  std::optional<std::uint64_t> seed;
  /// The model with the largest vertex-pair violation among the failures.
  std::optional<Matrix> worst_model;
  std::optional<WorstCase> worst;

  bool passed() const { return violations == 0; }
  Json to_json() const;
};

/// Runs check_invariance_exact for every vertex V of V_T.
ModelCheckReport check_invariance_consistent_models(const Matrix& K, const VPolytope& vt_vertices,
                                                    Eigen::Index n, Eigen::Index m,
                                                    const HPolyhedron& S, const DisturbanceSet& dist,
                                                    const LpOptions& lp_options = {});

/// Vertex mode: enumerates the vertices of V_T (must be bounded and small).
ModelCheckReport check_invariance_consistent_models_vertices(
    const Matrix& K, const ConsistencySet& vt, const HPolyhedron& S, const DisturbanceSet& dist,
    const LpOptions& lp_options = {});

/// Sample mode: `count` hit-and-run samples of V_T.
ModelCheckReport check_invariance_consistent_models_samples(
    const Matrix& K, const ConsistencySet& vt, const HPolyhedron& S, const DisturbanceSet& dist,
    std::size_t count, std::uint64_t seed, const LpOptions& lp_options = {});

struct Trajectory {
  Matrix F;
  std::vector<Vector> states;        // steps + 1
  std::vector<Vector> disturbances;  // steps
  std::vector<bool> contained;       // one flag per state
  std::optional<Eigen::Index> first_exit_step;
  std::string warning;

  void write_csv(const std::filesystem::path& path) const;
};

/// Disturbance choice per step: uniform over the vertices of D_delta,
/// zero, or a callback (step, state) -> disturbance.
struct DisturbancePolicy {
  enum class Kind { kVertexRandom, kZero, kCustom };
  Kind kind = Kind::kZero;
  std::uint64_t seed = 0;
  std::function<Vector(Eigen::Index, const Vector&)> custom;

  static DisturbancePolicy vertex_random(std::uint64_t seed) { return {Kind::kVertexRandom, seed, {}}; }
  static DisturbancePolicy zero() { return {}; }
  static DisturbancePolicy callback(std::function<Vector(Eigen::Index, const Vector&)> f) {
    return {Kind::kCustom, 0, std::move(f)};
  }
};

Trajectory simulate_closed_loop(const Matrix& A, const Matrix& B, const Matrix& K, const Vector& x0,
                                const DisturbanceSet& dist, Eigen::Index steps,
                                const DisturbancePolicy& policy, const HPolyhedron& S,
                                double tol = kSimulationContainmentTol);

/// Recomputes states from x0 and stored disturbances.
Trajectory replay(const Matrix& F, const Vector& x0, const std::vector<Vector>& disturbances,
                  const HPolyhedron& S, double tol = kSimulationContainmentTol);

/// Vertex-pair check of F S + D_delta in S. Requires bounded S and D_delta
/// with n <= 3; throws std::invalid_argument otherwise.
bool brute_force_invariance_oracle(const Matrix& F, const HPolyhedron& S,
                                   const DisturbanceSet& dist, double tol = 1e-9);

}  // namespace ddinv

#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ddinv/dataset.hpp"
#include "ddinv/farkas.hpp"
#include "ddinv/lp.hpp"
#include "ddinv/polyhedra.hpp"

namespace ddinv {

/// Raised before assembly when the LP would exceed the variable budget.
class ProblemTooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Formulation { kModelBased, kThm1, kThm2 };
const char* to_string(Formulation f);
/// Accepts "model", "thm1", "thm2".
Formulation parse_formulation(const std::string& s);

enum class SynthesisStatus { kFeasible, kInfeasible, kSolverFailure };
const char* to_string(SynthesisStatus s);

enum class Representation { kAuto, kFull, kMinimal };
const char* to_string(Representation r);
Representation parse_representation(const std::string& s);

struct SynthesisOptions {
  /// Maximize t in [0, 1] subject to E rhs <= (1 - t) b instead of pure
  /// feasibility.
  bool margin = false;
  /// Redundancy removal on the V_T rows (data-based formulation). Auto
  /// minimizes when T > auto_minimize_above and V_T is full dimensional.
  Representation representation = Representation::kAuto;
  Eigen::Index auto_minimize_above = 50;
  std::size_t max_variables = 10'000'000;
  double certificate_tol = kDefaultCertificateTol;
  LpOptions lp;
  RedundancyOptions redundancy;
  VertexEnumerationOptions vertices;
};

/// One multiplier matrix together with the containment problem it
/// certifies, rebuilt from the returned gain.
struct VertexCertificate {
  /// "model", "model_vertex", "state_vertex" or "input".
  std::string kind;
  Eigen::Index index = 0;
  /// x^j (state vertex) or vec(V^j) (model vertex); empty for the input block.
  Vector point;
  ContainmentProblem problem;
  FarkasCertificate certificate;
  CertificateReport report;
};

struct SynthesisDiagnostics {
  Eigen::Index num_vars = 0;
  Eigen::Index num_eq = 0;
  Eigen::Index num_ineq = 0;
  Eigen::Index num_nonzeros = 0;
  Eigen::Index num_vertices = 0;
  /// Rows of V_T before and after redundancy removal.
  Eigen::Index vt_rows_full = 0;
  Eigen::Index vt_rows_used = 0;
  double minimize_seconds = 0.0;
  double build_seconds = 0.0;
  double solve_seconds = 0.0;
  double verify_seconds = 0.0;
  std::string lp_status;
  std::string message;
};

struct SynthesisResult {
  SynthesisStatus status = SynthesisStatus::kSolverFailure;
  Formulation formulation = Formulation::kModelBased;
  double delta = 0.0;
  std::optional<Matrix> K;
  std::optional<double> margin;
  std::vector<VertexCertificate> certificates;
  /// True when every certificate passed re-verification.
  bool certificates_passed = false;
  /// V_T row map (index into the full stacked system) when rows were removed.
  std::vector<Eigen::Index> vt_row_map;
  SynthesisDiagnostics diagnostics;

  bool feasible() const { return status == SynthesisStatus::kFeasible; }
  Json to_json() const;
};

/// Model-based LP: E >= 0, [S(A+BK) S] = E blkdiag(S, D), E (b; delta 1) <= b,
/// for S = {x : S x <= b}. With an input set U = {u : U u <= g} also
/// E_u >= 0, U K = E_u S, E_u b <= g.
SynthesisResult synthesize_model_based(const Matrix& A, const Matrix& B, const HPolyhedron& S,
                                       const DisturbanceSet& dist,
                                       const std::optional<HPolyhedron>& input_set = std::nullopt,
                                       const SynthesisOptions& options = {});

/// Data-based LP with one multiplier block per vertex x^j of S:
/// E^j >= 0, [S, ([I;K] x^j)' kron S] = E^j [D 0; 0 G], E^j (delta 1; h) <= b,
/// where G vec(V) <= h are the (possibly reduced) rows of V_T.
/// Throws std::invalid_argument when S is unbounded or empty and
/// ProblemTooLarge above the variable budget.
SynthesisResult synthesize_thm1(const ExperimentData& data, const HPolyhedron& S,
                                const DisturbanceSet& dist,
                                const std::optional<HPolyhedron>& input_set = std::nullopt,
                                const SynthesisOptions& options = {});

/// As synthesize_thm1 but with a precomputed V_T (row map taken from it).
SynthesisResult synthesize_thm1(const ConsistencySet& vt, const HPolyhedron& S,
                                const DisturbanceSet& dist,
                                const std::optional<HPolyhedron>& input_set,
                                const SynthesisOptions& options);

/// Vertex-based LP: one model-based block per vertex V^j of V_T, shared K.
/// Throws std::invalid_argument on an empty vertex list or wrong dimension.
SynthesisResult synthesize_thm2(const VPolytope& vt_vertices, Eigen::Index n, Eigen::Index m,
                                const HPolyhedron& S, const DisturbanceSet& dist,
                                const std::optional<HPolyhedron>& input_set = std::nullopt,
                                const SynthesisOptions& options = {});

/// Containment problems behind each certificate kind, rebuilt from a gain.
ContainmentProblem model_containment_problem(const Matrix& A, const Matrix& B, const Matrix& K,
                                             const HPolyhedron& S, const DisturbanceSet& dist);
/// `vt_rows` are the V_T rows the multipliers refer to (reduced or full).
ContainmentProblem thm1_vertex_problem(const Vector& x, const Matrix& K, const HPolyhedron& S,
                                       const DisturbanceSet& dist, const HPolyhedron& vt_rows);
ContainmentProblem input_containment_problem(const Matrix& K, const HPolyhedron& U,
                                             const HPolyhedron& S);

/// Re-checks every stored multiplier against its containment problem by
/// direct matrix arithmetic.
bool reverify(const SynthesisResult& result, double tol = kDefaultCertificateTol);

struct BisectionProbe {
  double delta = 0.0;
  SynthesisStatus status = SynthesisStatus::kSolverFailure;
};

struct BisectionResult {
  bool feasible_at_lo = false;
  double delta_star = 0.0;
  std::optional<SynthesisResult> at_star;
  std::vector<BisectionProbe> probes;
};

/// Largest feasible delta in [lo, hi] to within abs_tol, assuming feasible
/// deltas form an interval starting at lo. Solver failures count as
/// infeasible.
BisectionResult max_delta_bisection(const std::function<SynthesisResult(double)>& problem,
                                    double lo, double hi, double abs_tol);

/// Writes K.csv, one certificate pair per block under certificates/, and
/// result.json into `dir`.
void write_synthesis_result(const std::filesystem::path& dir, const SynthesisResult& result,
                            const Json& config_echo = Json::object());

}  // namespace ddinv

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ddinv/linalg.hpp"
#include "ddinv/lp.hpp"
#include "ddinv/random.hpp"

namespace ddinv {

inline constexpr double kDefaultMembershipTol = 1e-8;
inline constexpr double kDefaultVertexMergeTol = 1e-7;

/// {x in R^n : A x <= b}.
class HPolyhedron {
 public:
  /// Throws std::invalid_argument unless A has b.size() >= 1 rows and at
  /// least one column.
  HPolyhedron(Matrix A, Vector b);

  const Matrix& A() const { return A_; }
  const Vector& b() const { return b_; }
  Eigen::Index ambient_dim() const { return A_.cols(); }
  Eigen::Index num_constraints() const { return A_.rows(); }

  /// Rows selected by `rows`, in that order.
  HPolyhedron select_rows(const std::vector<Eigen::Index>& rows) const;

 private:
  Matrix A_;
  Vector b_;
};

/// {x : lower <= A x <= upper}.
class TwoSidedPolyhedron {
 public:
  TwoSidedPolyhedron(Matrix A, Vector lower, Vector upper);

  const Matrix& A() const { return A_; }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }

  /// Rows [A; -A] with right-hand side [upper; -lower].
  HPolyhedron to_hpolyhedron() const;

 private:
  Matrix A_;
  Vector lower_;
  Vector upper_;
};

/// Vertex list of a bounded polyhedron.
class VPolytope {
 public:
  VPolytope(std::vector<Vector> vertices, Eigen::Index dim);

  const std::vector<Vector>& vertices() const { return vertices_; }
  Eigen::Index dim() const { return dim_; }
  std::size_t size() const { return vertices_.size(); }

  /// Vertices as the columns of a dim x size matrix.
  Matrix as_matrix() const;

 private:
  std::vector<Vector> vertices_;
  Eigen::Index dim_;
};

/// A x <= b + tol componentwise. Throws on dimension mismatch.
bool contains(const HPolyhedron& P, const Vector& x, double tol = kDefaultMembershipTol);

/// Boundedness of a nonempty two-sided polyhedron: full column rank of A.
bool is_bounded_two_sided(const TwoSidedPolyhedron& P, double rank_tol = kDefaultRankTol);

/// Boundedness of a nonempty polyhedron by testing that the recession cone
/// {z : A z <= 0} is trivial, one LP per coordinate direction and sign
/// inside the box |z_k| <= 1. Throws SolverError on backend failure.
bool is_bounded_general(const HPolyhedron& P, const LpOptions& lp_options = {});

struct NonemptyResult {
  bool nonempty = false;
  Vector witness;
};

/// LP feasibility of A x <= b. Throws SolverError on backend failure.
NonemptyResult check_nonempty(const HPolyhedron& P, const LpOptions& lp_options = {});

struct VertexEnumerationOptions {
  /// Largest ambient dimension accepted.
  Eigen::Index max_dim = 8;
  /// Largest number of row subsets C(m, n) examined.
  std::uint64_t max_subsets = 200'000'000;
  double feasibility_tol = 1e-9;
  double merge_tol = kDefaultVertexMergeTol;
  /// Skip the LP boundedness test (caller already knows P is bounded).
  bool assume_bounded = false;
  /// Run the candidate loop with OpenMP.
  bool parallel = true;
};

/// Exact vertex set of a bounded polyhedron by exhaustive active-set
/// enumeration: every n-row subset with a nonsingular system A_I x = b_I
/// yields a candidate, kept if feasible, merged within merge_tol. Costs
/// C(m, n) small solves, so both n and C(m, n) are capped.
///
/// Throws std::invalid_argument for unbounded or empty input or when a cap
/// is exceeded.
VPolytope enumerate_vertices(const HPolyhedron& P, const VertexEnumerationOptions& options = {});

struct RedundancyResult {
  HPolyhedron polyhedron;
  /// kept_rows[k] is the input row index of output row k.
  std::vector<Eigen::Index> kept_rows;
};

struct RedundancyOptions {
  /// A row is kept when max A_i x over the other rows exceeds b_i by more
  /// than this.
  double tol = 1e-9;
  /// Use the output-sensitive incremental method when the polyhedron is
  /// full dimensional. When false every row is tested against all others.
  bool incremental = true;
  LpOptions lp;
};

/// Minimal H-representation of a nonempty polyhedron. Throws SolverError
/// naming the row index when a row LP fails.
RedundancyResult remove_redundant(const HPolyhedron& P, const RedundancyOptions& options = {});

/// True when max A_i x over the rows other than `row` is at most b_i + tol.
bool is_row_redundant(const HPolyhedron& P, Eigen::Index row, double tol = 1e-9,
                      const LpOptions& lp_options = {});

/// Largest inscribed Euclidean ball. Radius 0 means P is flat (or a point).
/// Throws std::invalid_argument when P is empty.
struct ChebyshevBall {
  Vector center;
  double radius = 0.0;
};
ChebyshevBall chebyshev_ball(const HPolyhedron& P, double radius_cap = 1e6,
                             const LpOptions& lp_options = {});

struct HitAndRunOptions {
  std::size_t burn_in = 200;
  /// Steps between recorded samples.
  std::size_t thin = 10;
};

/// Hit-and-run samples from a bounded polyhedron, started at the Chebyshev
/// center. A flat polyhedron (radius 0) yields copies of the center.
std::vector<Vector> hit_and_run(const HPolyhedron& P, std::size_t count, Rng& rng,
                                const HitAndRunOptions& options = {},
                                const LpOptions& lp_options = {});

}  // namespace ddinv

#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ddinv/linalg.hpp"

namespace ddinv {

/// Raised when the LP backend fails for operational reasons (numerical
/// trouble, time limit, malformed model). Mathematical infeasibility is
/// never reported through this exception.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class VarDomain { kFree, kNonnegative };

/// Solver-facing LP:
///
///   minimize    objective' x
///   subject to  eq_matrix x   =  eq_rhs
///               ineq_matrix x <= ineq_rhs
///               x_k >= 0 for every k with domains[k] == kNonnegative.
///
/// An empty objective means pure feasibility.
struct LinearProgram {
  Eigen::Index num_vars = 0;
  Vector objective;
  SparseMatrix eq_matrix;
  Vector eq_rhs;
  SparseMatrix ineq_matrix;
  Vector ineq_rhs;
  std::vector<VarDomain> domains;

  LinearProgram() = default;
  explicit LinearProgram(Eigen::Index n);

  Eigen::Index num_eq() const { return eq_matrix.rows(); }
  Eigen::Index num_ineq() const { return ineq_matrix.rows(); }
  bool has_objective() const;

  /// Throws std::invalid_argument when dimensions disagree.
  void validate() const;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kSolverFailure };

const char* to_string(LpStatus status);

struct LpSolution {
  LpStatus status = LpStatus::kSolverFailure;
  Vector x;
  double objective = 0.0;
  /// Multipliers of the equality and inequality rows (sign convention of
  /// the Lagrangian  objective - y'(Ax - b); inequality duals are <= 0).
  Vector eq_duals;
  Vector ineq_duals;
  /// Farkas ray over [eq rows; ineq rows] when the backend supplies one.
  std::optional<Vector> dual_ray;
  long iterations = 0;
  double seconds = 0.0;
  std::string message;
};

enum class LpMethod { kChoose, kSimplex, kIpm };

struct LpOptions {
  /// Rows are scaled to unit infinity norm before the backend sees them.
  bool scale_rows = true;
  bool presolve = true;
  LpMethod method = LpMethod::kChoose;
  double primal_feasibility_tol = 1e-9;
  double dual_feasibility_tol = 1e-9;
  double time_limit_seconds = 3600.0;
  bool verbose = false;
};

/// Solves the LP with the vendored HiGHS backend. Thread-safe: each call
/// owns its own solver instance.
LpSolution solve(const LinearProgram& lp, const LpOptions& options = {});

/// Max absolute violation of the LP constraints at x (equalities, upper
/// inequalities and sign constraints).
double max_violation(const LinearProgram& lp, const Vector& x);

/// Small LP in free variables with "<=" rows that is solved repeatedly with
/// changing objective and a changing tail of rows. Warm starts between
/// solves. Used by redundancy elimination, where thousands of related LPs
/// differ by one row and the objective.
class IncrementalLp {
 public:
  explicit IncrementalLp(Eigen::Index num_vars, const LpOptions& options = {});
  ~IncrementalLp();
  IncrementalLp(IncrementalLp&&) noexcept;
  IncrementalLp& operator=(IncrementalLp&&) noexcept;
  IncrementalLp(const IncrementalLp&) = delete;
  IncrementalLp& operator=(const IncrementalLp&) = delete;

  Eigen::Index num_vars() const;
  Eigen::Index num_rows() const;

  void add_row(const RowVector& a, double b);
  /// Removes rows with index >= count.
  void truncate_rows(Eigen::Index count);
  /// Maximizes c' x over the current rows.
  LpSolution maximize(const Vector& c);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ddinv

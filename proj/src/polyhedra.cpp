#include "ddinv/polyhedra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "ddinv/kernels.hpp"

namespace ddinv {

HPolyhedron::HPolyhedron(Matrix A, Vector b) : A_(std::move(A)), b_(std::move(b)) {
  if (A_.rows() != b_.size()) {
    throw std::invalid_argument(fmt::format(
        "HPolyhedron: A has {} rows but b has {} entries", A_.rows(), b_.size()));
  }
  if (A_.rows() < 1 || A_.cols() < 1) {
    throw std::invalid_argument("HPolyhedron: need at least one row and one column");
  }
}

HPolyhedron HPolyhedron::select_rows(const std::vector<Eigen::Index>& rows) const {
  Matrix A(static_cast<Eigen::Index>(rows.size()), A_.cols());
  Vector b(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    A.row(static_cast<Eigen::Index>(k)) = A_.row(rows[k]);
    b(static_cast<Eigen::Index>(k)) = b_(rows[k]);
  }
  return HPolyhedron(std::move(A), std::move(b));
}

TwoSidedPolyhedron::TwoSidedPolyhedron(Matrix A, Vector lower, Vector upper)
    : A_(std::move(A)), lower_(std::move(lower)), upper_(std::move(upper)) {
  if (A_.rows() != lower_.size() || A_.rows() != upper_.size()) {
    throw std::invalid_argument("TwoSidedPolyhedron: bound length mismatch");
  }
  if (A_.rows() < 1 || A_.cols() < 1) {
    throw std::invalid_argument("TwoSidedPolyhedron: need at least one row and one column");
  }
  if ((lower_.array() > upper_.array()).any()) {
    throw std::invalid_argument("TwoSidedPolyhedron: lower bound exceeds upper bound");
  }
}

HPolyhedron TwoSidedPolyhedron::to_hpolyhedron() const {
  Matrix A(2 * A_.rows(), A_.cols());
  A << A_, -A_;
  Vector b(2 * A_.rows());
  b << upper_, -lower_;
  return HPolyhedron(std::move(A), std::move(b));
}

VPolytope::VPolytope(std::vector<Vector> vertices, Eigen::Index dim)
    : vertices_(std::move(vertices)), dim_(dim) {
  if (vertices_.empty()) throw std::invalid_argument("VPolytope: empty vertex list");
  for (const Vector& v : vertices_) {
    if (v.size() != dim_) throw std::invalid_argument("VPolytope: vertex dimension mismatch");
  }
}

Matrix VPolytope::as_matrix() const {
  Matrix M(dim_, static_cast<Eigen::Index>(vertices_.size()));
  for (std::size_t j = 0; j < vertices_.size(); ++j) {
    M.col(static_cast<Eigen::Index>(j)) = vertices_[j];
  }
  return M;
}

bool contains(const HPolyhedron& P, const Vector& x, double tol) {
  if (x.size() != P.ambient_dim()) {
    throw std::invalid_argument(fmt::format("contains: point has dimension {}, polyhedron {}",
                                            x.size(), P.ambient_dim()));
  }
  return ((P.A() * x - P.b()).array() <= tol).all();
}

bool is_bounded_two_sided(const TwoSidedPolyhedron& P, double rank_tol) {
  return numerical_rank(P.A(), rank_tol) == P.A().cols();
}

bool is_bounded_general(const HPolyhedron& P, const LpOptions& lp_options) {
  const Eigen::Index n = P.ambient_dim();
  const Eigen::Index m = P.num_constraints();
  // z free, A z <= 0, -1 <= z <= 1.
  LinearProgram lp(n);
  std::vector<Triplet> trip;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index k = 0; k < n; ++k) {
      if (P.A()(i, k) != 0.0) trip.emplace_back(i, k, P.A()(i, k));
    }
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    trip.emplace_back(m + 2 * k, k, 1.0);
    trip.emplace_back(m + 2 * k + 1, k, -1.0);
  }
  lp.ineq_matrix = sparse_from_triplets(m + 2 * n, n, trip);
  lp.ineq_rhs = Vector::Zero(m + 2 * n);
  lp.ineq_rhs.tail(2 * n).setOnes();

  constexpr double kRecessionTol = 1e-6;
  for (Eigen::Index k = 0; k < n; ++k) {
    for (double sign : {1.0, -1.0}) {
      lp.objective = Vector::Zero(n);
      lp.objective(k) = -sign;
      const LpSolution sol = solve(lp, lp_options);
      if (sol.status != LpStatus::kOptimal) {
        throw SolverError(fmt::format("is_bounded_general: recession LP for direction {}{} {}",
                                      sign > 0 ? "+" : "-", k, sol.message));
      }
      if (-sol.objective > kRecessionTol) return false;
    }
  }
  return true;
}

NonemptyResult check_nonempty(const HPolyhedron& P, const LpOptions& lp_options) {
  const Eigen::Index n = P.ambient_dim();
  LinearProgram lp(n);
  lp.ineq_matrix = P.A().sparseView();
  lp.ineq_rhs = P.b();
  const LpSolution sol = solve(lp, lp_options);
  NonemptyResult out;
  switch (sol.status) {
    case LpStatus::kOptimal:
      out.nonempty = true;
      out.witness = sol.x;
      return out;
    case LpStatus::kInfeasible:
      return out;
    default:
      throw SolverError("check_nonempty: " + sol.message);
  }
}

ChebyshevBall chebyshev_ball(const HPolyhedron& P, double radius_cap, const LpOptions& lp_options) {
  const Eigen::Index n = P.ambient_dim();
  const Eigen::Index m = P.num_constraints();
  // Variables (x, r): a_i x + |a_i| r <= b_i, r <= cap, r >= 0; maximize r.
  LinearProgram lp(n + 1);
  lp.domains[static_cast<std::size_t>(n)] = VarDomain::kNonnegative;
  Matrix A(m + 1, n + 1);
  A.setZero();
  A.topLeftCorner(m, n) = P.A();
  A.col(n).head(m) = P.A().rowwise().norm();
  A(m, n) = 1.0;
  Vector b(m + 1);
  b << P.b(), radius_cap;
  lp.ineq_matrix = A.sparseView();
  lp.ineq_rhs = b;
  lp.objective = Vector::Zero(n + 1);
  lp.objective(n) = -1.0;
  const LpSolution sol = solve(lp, lp_options);
  if (sol.status == LpStatus::kInfeasible) {
    throw std::invalid_argument("chebyshev_ball: polyhedron is empty");
  }
  if (sol.status != LpStatus::kOptimal) throw SolverError("chebyshev_ball: " + sol.message);
  return {sol.x.head(n), std::max(0.0, sol.x(n))};
}

VPolytope enumerate_vertices(const HPolyhedron& P, const VertexEnumerationOptions& options) {
  const Eigen::Index n = P.ambient_dim();
  const Eigen::Index m = P.num_constraints();
  if (n > options.max_dim) {
    throw std::invalid_argument(fmt::format(
        "enumerate_vertices: dimension {} exceeds the cap of {}; exhaustive active-set "
        "enumeration is only practical in low dimension",
        n, options.max_dim));
  }
  const std::uint64_t subsets =
      kernels::binomial(static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(n));
  if (subsets > options.max_subsets) {
    throw std::invalid_argument(fmt::format(
        "enumerate_vertices: C({}, {}) = {} row subsets exceed the cap of {}; remove redundant "
        "rows first",
        m, n, subsets, options.max_subsets));
  }
  if (!options.assume_bounded && !is_bounded_general(P)) {
    throw std::invalid_argument("enumerate_vertices: polyhedron is unbounded");
  }
  const std::vector<kernels::VertexCandidate> candidates =
      options.parallel ? kernels::parallel::active_set_candidates(P.A(), P.b(), options.feasibility_tol)
                       : kernels::serial::active_set_candidates(P.A(), P.b(), options.feasibility_tol);
  std::vector<Vector> unique;
  for (const auto& cand : candidates) {
    const bool seen = std::any_of(unique.begin(), unique.end(), [&](const Vector& v) {
      return (v - cand.point).cwiseAbs().maxCoeff() <= options.merge_tol;
    });
    if (!seen) unique.push_back(cand.point);
  }
  if (unique.empty()) {
    throw std::invalid_argument("enumerate_vertices: polyhedron is empty or has no vertex");
  }
  return VPolytope(std::move(unique), n);
}

namespace {

// LP: maximize a_row x over rows `others` plus a_row x <= b_row + 1.
double max_over_others(const Matrix& A, const Vector& b, Eigen::Index row,
                       const std::vector<Eigen::Index>& others, const LpOptions& lp_options) {
  const Eigen::Index n = A.cols();
  const auto k = static_cast<Eigen::Index>(others.size());
  LinearProgram lp(n);
  Matrix M(k + 1, n);
  Vector rhs(k + 1);
  for (Eigen::Index r = 0; r < k; ++r) {
    M.row(r) = A.row(others[static_cast<std::size_t>(r)]);
    rhs(r) = b(others[static_cast<std::size_t>(r)]);
  }
  M.row(k) = A.row(row);
  rhs(k) = b(row) + 1.0;
  lp.ineq_matrix = M.sparseView();
  lp.ineq_rhs = rhs;
  lp.objective = -A.row(row).transpose();
  const LpSolution sol = solve(lp, lp_options);
  if (sol.status != LpStatus::kOptimal) {
    throw SolverError(fmt::format("remove_redundant: LP for row {} failed ({})", row, sol.message));
  }
  return -sol.objective;
}

struct Normalized {
  Matrix A;
  Vector b;
  std::vector<Eigen::Index> rows;  // original indices of surviving rows
};

// Scales rows to unit infinity norm, drops trivially satisfied zero rows
// and keeps one representative (smallest b) per group of parallel rows.
Normalized normalize_and_dedupe(const HPolyhedron& P) {
  const Eigen::Index m = P.num_constraints();
  const Eigen::Index n = P.ambient_dim();
  Matrix A = P.A();
  Vector b = P.b();
  std::vector<Eigen::Index> alive;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double s = A.row(i).cwiseAbs().maxCoeff();
    if (s == 0.0) {
      if (b(i) < 0.0) {
        throw std::invalid_argument(
            fmt::format("remove_redundant: row {} reads 0 <= {} so the set is empty", i, b(i)));
      }
      continue;
    }
    A.row(i) /= s;
    b(i) /= s;
    alive.push_back(i);
  }
  std::sort(alive.begin(), alive.end(), [&](Eigen::Index p, Eigen::Index q) {
    for (Eigen::Index k = 0; k < n; ++k) {
      if (A(p, k) != A(q, k)) return A(p, k) < A(q, k);
    }
    if (b(p) != b(q)) return b(p) < b(q);
    return p < q;
  });
  constexpr double kSameDirection = 1e-12;
  std::vector<Eigen::Index> keep;
  for (std::size_t k = 0; k < alive.size(); ++k) {
    const Eigen::Index i = alive[k];
    if (!keep.empty() &&
        (A.row(i) - A.row(keep.back())).cwiseAbs().maxCoeff() <= kSameDirection) {
      continue;  // sorted by b within the group, so keep.back() is tighter
    }
    keep.push_back(i);
  }
  std::sort(keep.begin(), keep.end());
  Normalized out{Matrix(static_cast<Eigen::Index>(keep.size()), n),
                 Vector(static_cast<Eigen::Index>(keep.size())), keep};
  for (std::size_t k = 0; k < keep.size(); ++k) {
    out.A.row(static_cast<Eigen::Index>(k)) = A.row(keep[k]);
    out.b(static_cast<Eigen::Index>(k)) = b(keep[k]);
  }
  return out;
}

// Tests every row against all the others. Valid for full-dimensional sets
// after parallel duplicates are gone: a row is then irredundant exactly when
// it defines a facet, independently of the other verdicts.
std::vector<char> independent_tests(const Matrix& A, const Vector& b, double tol,
                                    const LpOptions& lp_options) {
  const Eigen::Index m = A.rows();
  std::vector<char> keep(static_cast<std::size_t>(m), 0);
  std::vector<std::string> errors(static_cast<std::size_t>(m));
#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index i = 0; i < m; ++i) {
    std::vector<Eigen::Index> others;
    others.reserve(static_cast<std::size_t>(m - 1));
    for (Eigen::Index k = 0; k < m; ++k) {
      if (k != i) others.push_back(k);
    }
    try {
      keep[static_cast<std::size_t>(i)] = max_over_others(A, b, i, others, lp_options) > b(i) + tol;
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(i)] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw SolverError(e);
  }
  return keep;
}

// Drops rows one at a time, each tested against the rows still present.
std::vector<char> sequential_tests(const Matrix& A, const Vector& b, double tol,
                                   const LpOptions& lp_options) {
  const Eigen::Index m = A.rows();
  std::vector<char> keep(static_cast<std::size_t>(m), 1);
  for (Eigen::Index i = 0; i < m; ++i) {
    std::vector<Eigen::Index> others;
    for (Eigen::Index k = 0; k < m; ++k) {
      if (k != i && keep[static_cast<std::size_t>(k)]) others.push_back(k);
    }
    if (others.empty()) continue;
    keep[static_cast<std::size_t>(i)] = max_over_others(A, b, i, others, lp_options) > b(i) + tol;
  }
  return keep;
}

// Output-sensitive elimination for full-dimensional sets: LPs only ever see
// the rows already proven irredundant. A candidate that escapes them is
// resolved by shooting a ray from the interior point towards the LP optimum;
// the first row hit is a facet.
std::vector<char> incremental_tests(const Matrix& A, const Vector& b, const Vector& interior,
                                    double tol, const LpOptions& lp_options) {
  const Eigen::Index m = A.rows();
  const Eigen::Index n = A.cols();
  std::vector<char> in_working_set(static_cast<std::size_t>(m), 0);
  std::vector<char> decided(static_cast<std::size_t>(m), 0);
  IncrementalLp lp(n, lp_options);
  const Vector slack = b - A * interior;

  auto add_to_working_set = [&](Eigen::Index k) {
    in_working_set[static_cast<std::size_t>(k)] = 1;
    decided[static_cast<std::size_t>(k)] = 1;
    lp.add_row(A.row(k), b(k));
  };

  for (Eigen::Index i = 0; i < m; ++i) {
    if (decided[static_cast<std::size_t>(i)]) continue;
    for (;;) {
      const Eigen::Index base = lp.num_rows();
      lp.add_row(A.row(i), b(i) + 1.0);
      const LpSolution sol = lp.maximize(A.row(i).transpose());
      lp.truncate_rows(base);
      if (sol.status != LpStatus::kOptimal) {
        throw SolverError(
            fmt::format("remove_redundant: LP for row {} failed ({})", i, sol.message));
      }
      if (sol.objective <= b(i) + tol) {
        decided[static_cast<std::size_t>(i)] = 1;
        break;
      }
      const Vector dir = sol.x - interior;
      const Vector rate = A * dir;
      Eigen::Index hit = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index k = 0; k < m; ++k) {
        if (in_working_set[static_cast<std::size_t>(k)] || rate(k) <= 0.0) continue;
        const double t = slack(k) / rate(k);
        if (t < best) {
          best = t;
          hit = k;
        }
      }
      if (hit < 0) hit = i;
      add_to_working_set(hit);
      if (hit == i) break;
    }
  }
  return in_working_set;
}

}  // namespace

bool is_row_redundant(const HPolyhedron& P, Eigen::Index row, double tol,
                      const LpOptions& lp_options) {
  if (row < 0 || row >= P.num_constraints()) {
    throw std::out_of_range("is_row_redundant: row index out of range");
  }
  std::vector<Eigen::Index> others;
  for (Eigen::Index k = 0; k < P.num_constraints(); ++k) {
    if (k != row) others.push_back(k);
  }
  if (others.empty()) return false;
  return max_over_others(P.A(), P.b(), row, others, lp_options) <= P.b()(row) + tol;
}

RedundancyResult remove_redundant(const HPolyhedron& P, const RedundancyOptions& options) {
  Normalized norm = normalize_and_dedupe(P);
  if (norm.rows.empty()) {
    throw std::invalid_argument("remove_redundant: every row is trivially satisfied");
  }
  const Eigen::Index m = norm.A.rows();
  std::vector<char> keep;
  if (m == 1) {
    keep.assign(1, 1);
  } else {
    const HPolyhedron scaled(norm.A, norm.b);
    if (!check_nonempty(scaled, options.lp).nonempty) {
      throw std::invalid_argument("remove_redundant: polyhedron is empty");
    }
    const ChebyshevBall ball = chebyshev_ball(scaled, 1e6, options.lp);
    const bool full_dimensional = ball.radius > 1e-10;
    if (!full_dimensional) {
      keep = sequential_tests(norm.A, norm.b, options.tol, options.lp);
    } else if (options.incremental) {
      keep = incremental_tests(norm.A, norm.b, ball.center, options.tol, options.lp);
      // Ties in the ray shooting can admit a row through a lower-dimensional
      // face; a final sequential pass over the (small) working set removes it.
      std::vector<Eigen::Index> ws;
      for (Eigen::Index i = 0; i < m; ++i) {
        if (keep[static_cast<std::size_t>(i)]) ws.push_back(i);
      }
      Matrix Aw(static_cast<Eigen::Index>(ws.size()), norm.A.cols());
      Vector bw(static_cast<Eigen::Index>(ws.size()));
      for (std::size_t k = 0; k < ws.size(); ++k) {
        Aw.row(static_cast<Eigen::Index>(k)) = norm.A.row(ws[k]);
        bw(static_cast<Eigen::Index>(k)) = norm.b(ws[k]);
      }
      const std::vector<char> confirm =
          ws.size() > 1 ? independent_tests(Aw, bw, options.tol, options.lp)
                        : std::vector<char>(ws.size(), 1);
      for (std::size_t k = 0; k < ws.size(); ++k) {
        keep[static_cast<std::size_t>(ws[k])] = confirm[k];
      }
    } else {
      keep = independent_tests(norm.A, norm.b, options.tol, options.lp);
    }
  }
  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (keep[static_cast<std::size_t>(i)]) kept.push_back(norm.rows[static_cast<std::size_t>(i)]);
  }
  return {P.select_rows(kept), kept};
}

std::vector<Vector> hit_and_run(const HPolyhedron& P, std::size_t count, Rng& rng,
                                const HitAndRunOptions& options, const LpOptions& lp_options) {
  const ChebyshevBall ball = chebyshev_ball(P, 1e6, lp_options);
  std::vector<Vector> out;
  out.reserve(count);
  if (ball.radius <= 1e-12) {
    out.assign(count, ball.center);
    return out;
  }
  const Eigen::Index n = P.ambient_dim();
  Vector x = ball.center;
  Vector slack = P.b() - P.A() * x;
  const std::size_t total = options.burn_in + count * std::max<std::size_t>(1, options.thin);
  for (std::size_t step = 0; step < total && out.size() < count; ++step) {
    Vector dir(n);
    for (Eigen::Index k = 0; k < n; ++k) dir(k) = rng.normal();
    dir.normalize();
    const Vector rate = P.A() * dir;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < rate.size(); ++i) {
      const double s = std::max(0.0, slack(i));
      if (rate(i) > 0.0) hi = std::min(hi, s / rate(i));
      if (rate(i) < 0.0) lo = std::max(lo, s / rate(i));
    }
    if (!std::isfinite(lo) || !std::isfinite(hi)) {
      throw std::invalid_argument("hit_and_run: polyhedron is unbounded");
    }
    const double t = rng.uniform(lo, hi);
    x += t * dir;
    slack -= t * rate;
    if (step >= options.burn_in && (step - options.burn_in) % std::max<std::size_t>(1, options.thin) == 0) {
      out.push_back(x);
    }
  }
  return out;
}

}  // namespace ddinv

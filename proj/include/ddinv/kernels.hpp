#pragma once

// Data-parallel inner loops. Every kernel exists twice with identical
// signatures: `parallel::` (OpenMP, used by the library) and `serial::`
// (plain loops, kept as the reference the tests compare against). Results
// are bit-identical between the two; no kernel uses a floating-point
// reduction whose order depends on the thread count.

#include <cstdint>
#include <vector>

#include "ddinv/linalg.hpp"

namespace ddinv::kernels {

/// Stacked consistency constraints G vec(V) <= h for the data matrices:
/// block i (rows i*nd .. i*nd+nd-1) is G_i = -(w_i' kron D) and
/// h_i = delta*1 - D x1_i, where w_i and x1_i are the i-th columns of W0
/// and X1.
struct StackedRows {
  Matrix G;
  Vector h;
};

/// One candidate vertex of an active-set enumeration.
struct VertexCandidate {
  Vector point;
  std::uint64_t subset_rank = 0;
};

namespace serial {

std::vector<std::uint8_t> batch_contains(const Matrix& A, const Vector& b, const Matrix& points,
                                         double tol);

StackedRows assemble_consistency_rows(const Matrix& W0, const Matrix& X1, const Matrix& D,
                                      double delta);

/// Evaluates max_i (G v - h)_i for each column v of `points`.
Vector max_residuals(const Matrix& G, const Vector& h, const Matrix& points);

/// Feasible basic solutions of A x <= b over all n-row subsets, ordered by
/// subset rank (lexicographic combination order).
std::vector<VertexCandidate> active_set_candidates(const Matrix& A, const Vector& b,
                                                   double feas_tol);

/// max over (i, j, k) of (S_A (F x_j + d_k) - S_b)_i, where x_j and d_k are
/// the columns of X and Dv.
double max_image_violation(const Matrix& S_A, const Vector& S_b, const Matrix& F,
                           const Matrix& X, const Matrix& Dv);

}  // namespace serial

namespace parallel {

std::vector<std::uint8_t> batch_contains(const Matrix& A, const Vector& b, const Matrix& points,
                                         double tol);

StackedRows assemble_consistency_rows(const Matrix& W0, const Matrix& X1, const Matrix& D,
                                      double delta);

Vector max_residuals(const Matrix& G, const Vector& h, const Matrix& points);

std::vector<VertexCandidate> active_set_candidates(const Matrix& A, const Vector& b,
                                                   double feas_tol);

double max_image_violation(const Matrix& S_A, const Vector& S_b, const Matrix& F,
                           const Matrix& X, const Matrix& Dv);

}  // namespace parallel

/// Binomial coefficient, saturating at UINT64_MAX.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

/// The `rank`-th k-subset of {0..n-1} in lexicographic order.
std::vector<Eigen::Index> unrank_combination(std::uint64_t rank, Eigen::Index n, Eigen::Index k);

/// Number of OpenMP threads the parallel kernels will use.
int max_threads();

}  // namespace ddinv::kernels

#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cstdint>
#include <vector>

namespace ddinv {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, std::int64_t>;
using Triplet = Eigen::Triplet<double, std::int64_t>;

/// Singular values below this fraction of the largest one count as zero.
inline constexpr double kDefaultRankTol = 1e-9;

/// Numerical rank via SVD with a relative threshold.
int numerical_rank(const Matrix& M, double rel_tol = kDefaultRankTol);

/// Stacks the columns of M, left to right.
Vector vec(const Matrix& M);

/// Inverse of vec for a rows x cols matrix.
Matrix unvec(const Vector& v, Eigen::Index rows, Eigen::Index cols);

Matrix kron(const Matrix& A, const Matrix& B);

/// Infinity norm of a matrix (max absolute row sum).
double inf_norm(const Matrix& M);

/// Builds a sparse matrix from triplets, summing duplicates.
SparseMatrix sparse_from_triplets(Eigen::Index rows, Eigen::Index cols,
                                  const std::vector<Triplet>& triplets);

}  // namespace ddinv

#include "ddinv/linalg.hpp"

#include <Eigen/SVD>

#include <stdexcept>

namespace ddinv {

int numerical_rank(const Matrix& M, double rel_tol) {
  if (M.size() == 0) return 0;
  Eigen::BDCSVD<Matrix> svd(M);
  const Vector& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double threshold = rel_tol * sv(0);
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > threshold) ++rank;
  }
  return rank;
}

Vector vec(const Matrix& M) {
  return Eigen::Map<const Vector>(M.data(), M.size());
}

Matrix unvec(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols) {
    throw std::invalid_argument("unvec: vector length does not match rows*cols");
  }
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

Matrix kron(const Matrix& A, const Matrix& B) {
  Matrix K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    }
  }
  return K;
}

double inf_norm(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  return M.cwiseAbs().rowwise().sum().maxCoeff();
}

SparseMatrix sparse_from_triplets(Eigen::Index rows, Eigen::Index cols,
                                  const std::vector<Triplet>& triplets) {
  SparseMatrix S(rows, cols);
  S.setFromTriplets(triplets.begin(), triplets.end());
  S.makeCompressed();
  return S;
}

}  // namespace ddinv

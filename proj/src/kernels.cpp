#include "ddinv/kernels.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <limits>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ddinv::kernels {

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    const std::uint64_t num = n - k + i;
    // result * num / i stays integral at every step.
    if (result > std::numeric_limits<std::uint64_t>::max() / num) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    result = result * num / i;
  }
  return result;
}

std::vector<Eigen::Index> unrank_combination(std::uint64_t rank, Eigen::Index n, Eigen::Index k) {
  std::vector<Eigen::Index> combo;
  combo.reserve(static_cast<std::size_t>(k));
  Eigen::Index next = 0;
  for (Eigen::Index slot = 0; slot < k; ++slot) {
    for (Eigen::Index v = next; v < n; ++v) {
      const std::uint64_t count =
          binomial(static_cast<std::uint64_t>(n - v - 1), static_cast<std::uint64_t>(k - slot - 1));
      if (rank < count) {
        combo.push_back(v);
        next = v + 1;
        break;
      }
      rank -= count;
    }
  }
  if (static_cast<Eigen::Index>(combo.size()) != k) {
    throw std::out_of_range("unrank_combination: rank out of range");
  }
  return combo;
}

namespace {

bool next_combination(std::vector<Eigen::Index>& c, Eigen::Index n) {
  const auto k = static_cast<Eigen::Index>(c.size());
  for (Eigen::Index i = k - 1; i >= 0; --i) {
    if (c[static_cast<std::size_t>(i)] < n - k + i) {
      ++c[static_cast<std::size_t>(i)];
      for (Eigen::Index j = i + 1; j < k; ++j) {
        c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
      }
      return true;
    }
  }
  return false;
}

bool row_contains(const Matrix& A, const Vector& b, const Eigen::Ref<const Vector>& x, double tol) {
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    if (A.row(i).dot(x) > b(i) + tol) return false;
  }
  return true;
}

// Candidates for subset ranks [begin, end).
void candidates_in_range(const Matrix& A, const Vector& b, double feas_tol, std::uint64_t begin,
                         std::uint64_t end, std::vector<VertexCandidate>& out) {
  const Eigen::Index m = A.rows();
  const Eigen::Index n = A.cols();
  if (begin >= end) return;
  std::vector<Eigen::Index> combo = unrank_combination(begin, m, n);
  Matrix sub(n, n);
  Vector rhs(n);
  Eigen::FullPivLU<Matrix> lu(n, n);
  for (std::uint64_t r = begin; r < end; ++r) {
    for (Eigen::Index i = 0; i < n; ++i) {
      sub.row(i) = A.row(combo[static_cast<std::size_t>(i)]);
      rhs(i) = b(combo[static_cast<std::size_t>(i)]);
    }
    lu.compute(sub);
    lu.setThreshold(1e-10);
    if (lu.isInvertible()) {
      Vector x = lu.solve(rhs);
      const double tol = feas_tol * std::max(1.0, x.cwiseAbs().maxCoeff());
      if (x.allFinite() && row_contains(A, b, x, tol)) out.push_back({std::move(x), r});
    }
    if (r + 1 < end) next_combination(combo, m);
  }
}

void check_points(const Matrix& A, const Vector& b, const Matrix& points) {
  if (points.rows() != A.cols() || A.rows() != b.size()) {
    throw std::invalid_argument("batch_contains: dimension mismatch");
  }
}

void check_stacking(const Matrix& W0, const Matrix& X1, const Matrix& D) {
  if (W0.cols() != X1.cols() || D.cols() != X1.rows() || W0.rows() < X1.rows()) {
    throw std::invalid_argument("assemble_consistency_rows: dimension mismatch");
  }
}

void fill_block(const Matrix& W0, const Matrix& X1, const Matrix& D, double delta, Eigen::Index i,
                StackedRows& out) {
  const Eigen::Index nd = D.rows();
  const Eigen::Index n = D.cols();
  const Eigen::Index p = W0.rows();
  // Column block c of -(w_i' kron D) is -w_i(c) * D.
  for (Eigen::Index c = 0; c < p; ++c) {
    out.G.block(i * nd, c * n, nd, n) = -W0(c, i) * D;
  }
  out.h.segment(i * nd, nd) = Vector::Constant(nd, delta) - D * X1.col(i);
}

double image_violation_for_pair(const Matrix& S_A, const Vector& S_b, const Matrix& F,
                                const Matrix& X, const Matrix& Dv, Eigen::Index j) {
  double worst = -std::numeric_limits<double>::infinity();
  const Vector fx = F * X.col(j);
  for (Eigen::Index k = 0; k < Dv.cols(); ++k) {
    const Vector y = fx + Dv.col(k);
    worst = std::max(worst, (S_A * y - S_b).maxCoeff());
  }
  return worst;
}

}  // namespace

namespace serial {

std::vector<std::uint8_t> batch_contains(const Matrix& A, const Vector& b, const Matrix& points,
                                         double tol) {
  check_points(A, b, points);
  std::vector<std::uint8_t> out(static_cast<std::size_t>(points.cols()));
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    out[static_cast<std::size_t>(j)] = row_contains(A, b, points.col(j), tol) ? 1 : 0;
  }
  return out;
}

StackedRows assemble_consistency_rows(const Matrix& W0, const Matrix& X1, const Matrix& D,
                                      double delta) {
  check_stacking(W0, X1, D);
  const Eigen::Index T = W0.cols();
  StackedRows out{Matrix(T * D.rows(), D.cols() * W0.rows()), Vector(T * D.rows())};
  for (Eigen::Index i = 0; i < T; ++i) fill_block(W0, X1, D, delta, i, out);
  return out;
}

Vector max_residuals(const Matrix& G, const Vector& h, const Matrix& points) {
  Vector out(points.cols());
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    out(j) = (G * points.col(j) - h).maxCoeff();
  }
  return out;
}

std::vector<VertexCandidate> active_set_candidates(const Matrix& A, const Vector& b,
                                                   double feas_tol) {
  std::vector<VertexCandidate> out;
  const std::uint64_t total = binomial(static_cast<std::uint64_t>(A.rows()),
                                       static_cast<std::uint64_t>(A.cols()));
  candidates_in_range(A, b, feas_tol, 0, total, out);
  return out;
}

double max_image_violation(const Matrix& S_A, const Vector& S_b, const Matrix& F, const Matrix& X,
                           const Matrix& Dv) {
  double worst = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    worst = std::max(worst, image_violation_for_pair(S_A, S_b, F, X, Dv, j));
  }
  return worst;
}

}  // namespace serial

namespace parallel {

std::vector<std::uint8_t> batch_contains(const Matrix& A, const Vector& b, const Matrix& points,
                                         double tol) {
  check_points(A, b, points);
  std::vector<std::uint8_t> out(static_cast<std::size_t>(points.cols()));
  const Eigen::Index N = points.cols();
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < N; ++j) {
    out[static_cast<std::size_t>(j)] = row_contains(A, b, points.col(j), tol) ? 1 : 0;
  }
  return out;
}

StackedRows assemble_consistency_rows(const Matrix& W0, const Matrix& X1, const Matrix& D,
                                      double delta) {
  check_stacking(W0, X1, D);
  const Eigen::Index T = W0.cols();
  StackedRows out{Matrix(T * D.rows(), D.cols() * W0.rows()), Vector(T * D.rows())};
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < T; ++i) fill_block(W0, X1, D, delta, i, out);
  return out;
}

Vector max_residuals(const Matrix& G, const Vector& h, const Matrix& points) {
  Vector out(points.cols());
  const Eigen::Index N = points.cols();
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < N; ++j) {
    out(j) = (G * points.col(j) - h).maxCoeff();
  }
  return out;
}

std::vector<VertexCandidate> active_set_candidates(const Matrix& A, const Vector& b,
                                                   double feas_tol) {
  const std::uint64_t total = binomial(static_cast<std::uint64_t>(A.rows()),
                                       static_cast<std::uint64_t>(A.cols()));
  const std::uint64_t chunks =
      std::max<std::uint64_t>(1, std::min<std::uint64_t>(total, 64ULL * max_threads()));
  const std::uint64_t per_chunk = (total + chunks - 1) / chunks;
  std::vector<std::vector<VertexCandidate>> parts(static_cast<std::size_t>(chunks));
  const auto num_chunks = static_cast<std::int64_t>(chunks);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t c = 0; c < num_chunks; ++c) {
    const std::uint64_t begin = static_cast<std::uint64_t>(c) * per_chunk;
    const std::uint64_t end = std::min(total, begin + per_chunk);
    candidates_in_range(A, b, feas_tol, begin, end, parts[static_cast<std::size_t>(c)]);
  }
  std::vector<VertexCandidate> out;
  for (auto& part : parts) {
    std::move(part.begin(), part.end(), std::back_inserter(out));
  }
  return out;
}

double max_image_violation(const Matrix& S_A, const Vector& S_b, const Matrix& F, const Matrix& X,
                           const Matrix& Dv) {
  double worst = -std::numeric_limits<double>::infinity();
  const Eigen::Index N = X.cols();
#pragma omp parallel for reduction(max : worst) schedule(static)
  for (Eigen::Index j = 0; j < N; ++j) {
    worst = std::max(worst, image_violation_for_pair(S_A, S_b, F, X, Dv, j));
  }
  return worst;
}

}  // namespace parallel

}  // namespace ddinv::kernels

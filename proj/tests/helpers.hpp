#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "ddinv/dataset.hpp"
#include "ddinv/farkas.hpp"
#include "ddinv/polyhedra.hpp"
#include "ddinv/random.hpp"

namespace ddinv::test {

inline Matrix mat(Eigen::Index r, Eigen::Index c, std::initializer_list<double> v) {
  Matrix M(r, c);
  auto it = v.begin();
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) M(i, j) = *it++;
  return M;
}

inline Vector vecof(std::initializer_list<double> v) {
  Vector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double e : v) x(i++) = e;
  return x;
}

/// [I; -I] interleaved per coordinate.
inline Matrix box_rows(Eigen::Index n) {
  Matrix D = Matrix::Zero(2 * n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    D(2 * i, i) = 1.0;
    D(2 * i + 1, i) = -1.0;
  }
  return D;
}

inline HPolyhedron unit_box(Eigen::Index n) { return HPolyhedron(box_rows(n), Vector::Ones(2 * n)); }

inline Matrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Matrix M(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) M(i, j) = rng.uniform(lo, hi);
  return M;
}

/// Bounded polytope {x : A x <= 1} containing the origin: a box plus a few
/// random cuts.
inline HPolyhedron random_c_set(Eigen::Index n, Rng& rng, Eigen::Index extra = 2) {
  Matrix A(2 * n + extra, n);
  A.topRows(2 * n) = box_rows(n);
  for (Eigen::Index k = 0; k < extra; ++k) A.row(2 * n + k) = random_matrix(1, n, rng, -1.5, 1.5);
  for (Eigen::Index i = 0; i < 2 * n; ++i) A.row(i) *= rng.uniform(0.6, 1.6);
  return HPolyhedron(A, Vector::Ones(A.rows()));
}

/// Vertices by brute force over all n-row subsets, written out from scratch
/// so it shares no code with the library enumeration.
inline std::vector<Vector> brute_vertices(const Matrix& A, const Vector& b, double tol = 1e-9) {
  const Eigen::Index n = A.cols(), p = A.rows();
  std::vector<Vector> out;
  std::vector<int> pick(static_cast<std::size_t>(p), 0);
  std::fill(pick.end() - n, pick.end(), 1);
  do {
    Matrix M(n, n);
    Vector r(n);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < p; ++i) {
      if (pick[static_cast<std::size_t>(i)]) {
        M.row(k) = A.row(i);
        r(k++) = b(i);
      }
    }
    Eigen::FullPivLU<Matrix> lu(M);
    if (lu.rank() < n) continue;
    const Vector x = lu.solve(r);
    if (((A * x - b).array() > tol * (1.0 + b.cwiseAbs().maxCoeff())).any()) continue;
    bool dup = false;
    for (const auto& v : out) dup |= (v - x).cwiseAbs().maxCoeff() < 1e-7;
    if (!dup) out.push_back(x);
  } while (std::next_permutation(pick.begin(), pick.end()));
  return out;
}

inline bool same_point_sets(std::vector<Vector> a, std::vector<Vector> b, double tol = 1e-7) {
  if (a.size() != b.size()) return false;
  for (const auto& x : a) {
    bool found = false;
    for (const auto& y : b) found |= (x - y).cwiseAbs().maxCoeff() < tol;
    if (!found) return false;
  }
  return true;
}

/// Direct matrix-arithmetic check of a containment certificate.
struct DirectCheck {
  double min_entry;
  double eq_residual;
  double ineq_excess;
};

inline DirectCheck direct_check(const ContainmentProblem& p, const Matrix& E) {
  return {E.size() ? E.minCoeff() : 0.0,
          E.size() ? (E * p.A - p.B).cwiseAbs().maxCoeff() : 0.0,
          E.size() ? (E * p.c - p.d).maxCoeff() : 0.0};
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("ddinv_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace ddinv::test

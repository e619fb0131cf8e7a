#include <doctest.h>

#include "ddinv/kernels.hpp"
#include "helpers.hpp"

using namespace ddinv;
using namespace ddinv::test;

TEST_SUITE("kernels") {

TEST_CASE("batch_contains serial and parallel agree") {
  Rng rng(11);
  const HPolyhedron P = random_c_set(4, rng, 6);
  const Matrix pts = random_matrix(4, 5000, rng, -1.5, 1.5);
  const auto s = kernels::serial::batch_contains(P.A(), P.b(), pts, 1e-9);
  const auto p = kernels::parallel::batch_contains(P.A(), P.b(), pts, 1e-9);
  CHECK(s == p);
  long inside = 0;
  for (auto f : s) inside += f;
  CHECK(inside > 0);
  CHECK(inside < 5000);
}

TEST_CASE("consistency rows bit-identical and match the Kronecker formula") {
  Rng rng(3);
  const Eigen::Index n = 3, m = 2, T = 40;
  const Matrix W0 = random_matrix(n + m, T, rng);
  const Matrix X1 = random_matrix(n, T, rng);
  const Matrix D = box_rows(n);
  const auto s = kernels::serial::assemble_consistency_rows(W0, X1, D, 0.05);
  const auto p = kernels::parallel::assemble_consistency_rows(W0, X1, D, 0.05);
  CHECK((s.G.array() == p.G.array()).all());
  CHECK((s.h.array() == p.h.array()).all());
  for (Eigen::Index i = 0; i < T; ++i) {
    const Matrix Gi = -kron(W0.col(i).transpose(), D);
    CHECK((s.G.middleRows(i * 6, 6) - Gi).cwiseAbs().maxCoeff() == 0.0);
    const Vector hi = Vector::Constant(6, 0.05) - D * X1.col(i);
    CHECK((s.h.segment(i * 6, 6) - hi).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("max_residuals serial and parallel agree") {
  Rng rng(5);
  const Matrix G = random_matrix(300, 6, rng);
  const Vector h = random_matrix(300, 1, rng);
  const Matrix pts = random_matrix(6, 700, rng);
  const Vector s = kernels::serial::max_residuals(G, h, pts);
  const Vector p = kernels::parallel::max_residuals(G, h, pts);
  CHECK((s.array() == p.array()).all());
  CHECK(s(17) == doctest::Approx((G * pts.col(17) - h).maxCoeff()).epsilon(1e-14));
}

TEST_CASE("active-set candidates identical in content and order") {
  Rng rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    const HPolyhedron P = random_c_set(3, rng, 5);
    const auto s = kernels::serial::active_set_candidates(P.A(), P.b(), 1e-9);
    const auto p = kernels::parallel::active_set_candidates(P.A(), P.b(), 1e-9);
    REQUIRE(s.size() == p.size());
    for (std::size_t k = 0; k < s.size(); ++k) {
      CHECK(s[k].subset_rank == p[k].subset_rank);
      CHECK((s[k].point.array() == p[k].point.array()).all());
    }
  }
}

TEST_CASE("max_image_violation serial and parallel agree") {
  Rng rng(9);
  const HPolyhedron S = random_c_set(3, rng);
  const Matrix F = random_matrix(3, 3, rng, -0.7, 0.7);
  const Matrix X = random_matrix(3, 40, rng);
  const Matrix Dv = random_matrix(3, 8, rng, -0.1, 0.1);
  const double s = kernels::serial::max_image_violation(S.A(), S.b(), F, X, Dv);
  const double p = kernels::parallel::max_image_violation(S.A(), S.b(), F, X, Dv);
  CHECK(s == p);
  double ref = -1e300;
  for (Eigen::Index j = 0; j < X.cols(); ++j)
    for (Eigen::Index k = 0; k < Dv.cols(); ++k)
      ref = std::max(ref, (S.A() * (F * X.col(j) + Dv.col(k)) - S.b()).maxCoeff());
  CHECK(s == doctest::Approx(ref).epsilon(1e-13));
}

TEST_CASE("combination unranking walks lexicographic order") {
  CHECK(kernels::binomial(6, 3) == 20);
  CHECK(kernels::binomial(200, 100) == UINT64_MAX);
  CHECK(kernels::unrank_combination(0, 5, 2) == std::vector<Eigen::Index>{0, 1});
  CHECK(kernels::unrank_combination(9, 5, 2) == std::vector<Eigen::Index>{3, 4});
  CHECK(kernels::unrank_combination(4, 5, 2) == std::vector<Eigen::Index>{1, 2});
}

}  // TEST_SUITE

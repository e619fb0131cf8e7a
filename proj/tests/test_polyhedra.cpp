#include <doctest.h>

#include "ddinv/platoon.hpp"
#include "helpers.hpp"

using namespace ddinv;
using namespace ddinv::test;

TEST_SUITE("polyhedra") {

TEST_CASE("contains") {
  const HPolyhedron box = unit_box(2);
  CHECK(contains(box, vecof({0, 0}), 0.0));
  CHECK_FALSE(contains(box, vecof({1 + 1e-3, 0}), 1e-9));
  CHECK(contains(make_platoon().S, Vector::Zero(3)));
}

TEST_CASE("two-sided boundedness by rank") {
  CHECK(is_bounded_two_sided({Matrix::Identity(3, 3), -Vector::Ones(3), Vector::Ones(3)}));
  CHECK_FALSE(is_bounded_two_sided({mat(1, 2, {1, 0}), -Vector::Ones(1), Vector::Ones(1)}));
  CHECK(is_bounded_two_sided({mat(3, 2, {1, 0, 0, 1, 1, 1}), -Vector::Ones(3), Vector::Ones(3)}));
}

TEST_CASE("general boundedness") {
  CHECK(is_bounded_general(unit_box(2)));
  CHECK_FALSE(is_bounded_general(HPolyhedron(mat(1, 2, {1, 0}), Vector::Ones(1))));
  CHECK(is_bounded_general(make_platoon().S));
}

TEST_CASE("rank test and recession-cone LP agree on random two-sided sets") {
  Rng rng(21);
  int bounded = 0, unbounded = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.index(4));
    const Eigen::Index rows = 1 + static_cast<Eigen::Index>(rng.index(5));
    Matrix A = random_matrix(rows, n, rng);
    if (trial % 3 == 0 && n > 1) A.col(n - 1) = A.col(0) * 0.5;  // force a kernel
    Vector lo(rows), hi(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
      lo(i) = rng.uniform(-2, -0.1);
      hi(i) = rng.uniform(0.1, 2);
    }
    const TwoSidedPolyhedron P(A, lo, hi);
    const bool rank_answer = is_bounded_two_sided(P);
    CHECK(rank_answer == is_bounded_general(P.to_hpolyhedron()));
    (rank_answer ? bounded : unbounded)++;
  }
  CHECK(bounded > 0);
  CHECK(unbounded > 0);
}

TEST_CASE("vertex enumeration small cases") {
  const VPolytope box = enumerate_vertices(unit_box(2));
  CHECK(box.size() == 4);
  CHECK(same_point_sets(box.vertices(), {vecof({1, 1}), vecof({1, -1}), vecof({-1, 1}), vecof({-1, -1})}));
  const HPolyhedron simplex(mat(3, 2, {-1, 0, 0, -1, 1, 1}), vecof({0, 0, 1}));
  CHECK(same_point_sets(enumerate_vertices(simplex).vertices(), {vecof({0, 0}), vecof({1, 0}), vecof({0, 1})}));
}

TEST_CASE("platoon S vertices match brute-force enumeration") {
  const HPolyhedron S = make_platoon().S;
  const VPolytope V = enumerate_vertices(S);
  const auto ref = brute_vertices(S.A(), S.b());
  CHECK(V.size() == ref.size());
  CHECK(V.size() == 8);
  CHECK(same_point_sets(V.vertices(), ref));
}

TEST_CASE("vertex enumeration errors") {
  CHECK_THROWS(enumerate_vertices(HPolyhedron(mat(1, 2, {1, 0}), Vector::Ones(1))));
  VertexEnumerationOptions opt;
  opt.max_dim = 2;
  CHECK_THROWS(enumerate_vertices(unit_box(3), opt));
}

TEST_CASE("hull membership reproduces contains") {
  Rng rng(31);
  for (int trial = 0; trial < 3; ++trial) {
    const HPolyhedron P = random_c_set(2, rng, 3);
    const VPolytope V = enumerate_vertices(P);
    // Membership in conv(V) as an LP: lambda >= 0, sum lambda = 1, V lambda = x.
    const Eigen::Index k = static_cast<Eigen::Index>(V.size());
    const Matrix Vm = V.as_matrix();
    int agree = 0;
    for (int s = 0; s < 1000; ++s) {
      const Vector x = random_matrix(2, 1, rng, -1.8, 1.8);
      LinearProgram lp(k);
      std::vector<Triplet> t;
      for (Eigen::Index j = 0; j < k; ++j) {
        t.emplace_back(0, j, 1.0);
        for (Eigen::Index i = 0; i < 2; ++i) t.emplace_back(1 + i, j, Vm(i, j));
      }
      lp.eq_matrix = sparse_from_triplets(3, k, t);
      lp.eq_rhs = Vector(3);
      lp.eq_rhs << 1.0, x;
      lp.ineq_matrix = SparseMatrix(0, k);
      lp.ineq_rhs = Vector(0);
      lp.domains.assign(static_cast<std::size_t>(k), VarDomain::kNonnegative);
      const bool in_hull = solve(lp).status == LpStatus::kOptimal;
      const double slack = (P.A() * x - P.b()).maxCoeff();
      if (std::abs(slack) < 1e-7) {
        ++agree;  // boundary points: either answer is within tolerance
        continue;
      }
      agree += in_hull == (slack < 0);
    }
    CHECK(agree == 1000);
  }
}

TEST_CASE("every vertex activates at least n rows of the minimal representation") {
  Rng rng(41);
  for (int trial = 0; trial < 5; ++trial) {
    const HPolyhedron P = random_c_set(3, rng, 6);
    const HPolyhedron M = remove_redundant(P).polyhedron;
    const VPolytope V = enumerate_vertices(P);
    for (const Vector& v : V.vertices()) {
      const Vector r = M.A() * v - M.b();
      CHECK((r.array().abs() < 1e-7).count() >= 3);
    }
  }
}

TEST_CASE("redundancy removal") {
  const HPolyhedron two(mat(2, 1, {1, 1}), vecof({1, 2}));
  const RedundancyResult r = remove_redundant(two);
  CHECK(r.kept_rows == std::vector<Eigen::Index>{0});
  const RedundancyResult box = remove_redundant(unit_box(3));
  CHECK(box.kept_rows == std::vector<Eigen::Index>{0, 1, 2, 3, 4, 5});
}

TEST_CASE("redundancy removal leaves no redundant row and keeps the set") {
  Rng rng(51);
  for (int trial = 0; trial < 6; ++trial) {
    const Eigen::Index n = 2 + trial % 3;
    const HPolyhedron P = random_c_set(n, rng, 12);
    for (bool incremental : {true, false}) {
      RedundancyOptions opt;
      opt.incremental = incremental;
      const RedundancyResult r = remove_redundant(P, opt);
      for (Eigen::Index i = 0; i < r.polyhedron.num_constraints(); ++i) {
        CHECK_FALSE(is_row_redundant(r.polyhedron, i));
      }
      for (int s = 0; s < 500; ++s) {
        const Vector x = random_matrix(n, 1, rng, -1.7, 1.7);
        const bool a = contains(P, x, 0.0), b = contains(r.polyhedron, x, 0.0);
        if (a != b) CHECK(std::abs((P.A() * x - P.b()).maxCoeff()) < 1e-9);
      }
    }
  }
}

TEST_CASE("redundancy removal on a flat set") {
  // Segment {x2 = 0, |x1| <= 1} with a duplicated and a loose row.
  const HPolyhedron P(mat(6, 2, {0, 1, 0, -1, 1, 0, -1, 0, 2, 0, 1, 0}), vecof({0, 0, 1, 1, 2, 3}));
  const RedundancyResult r = remove_redundant(P);
  CHECK(r.kept_rows.size() == 4);
  CHECK(contains(r.polyhedron, vecof({0.5, 0})));
  CHECK_FALSE(contains(r.polyhedron, vecof({1.5, 0})));
  CHECK_FALSE(contains(r.polyhedron, vecof({0, 0.1})));
}

TEST_CASE("nonemptiness") {
  CHECK_FALSE(check_nonempty(HPolyhedron(mat(2, 1, {1, -1}), vecof({1, -2}))).nonempty);
  const DisturbanceSet d{box_rows(3), 0.0};
  const NonemptyResult r = check_nonempty(d.polyhedron());
  CHECK(r.nonempty);
  CHECK(r.witness.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("chebyshev ball of the unit box") {
  const ChebyshevBall c = chebyshev_ball(unit_box(2));
  CHECK(c.radius == doctest::Approx(1.0));
  CHECK(c.center.cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("hit-and-run stays inside and covers the set") {
  Rng rng(61);
  const HPolyhedron P = unit_box(2);
  const auto pts = hit_and_run(P, 2000, rng);
  CHECK(pts.size() == 2000);
  Vector mean = Vector::Zero(2);
  int q1 = 0;
  for (const auto& x : pts) {
    CHECK(contains(P, x, 1e-9));
    mean += x;
    q1 += x(0) > 0 && x(1) > 0;
  }
  mean /= 2000.0;
  CHECK(mean.cwiseAbs().maxCoeff() < 0.1);
  CHECK(q1 > 350);
  CHECK(q1 < 650);
}

}  // TEST_SUITE

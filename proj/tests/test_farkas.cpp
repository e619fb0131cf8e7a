#include <doctest.h>

#include "helpers.hpp"

using namespace ddinv;
using namespace ddinv::test;

TEST_SUITE("farkas") {

TEST_CASE("identity and scaling containments") {
  const Matrix I = Matrix::Identity(2, 2);
  ContainmentProblem id{I, Vector::Ones(2), I, Vector::Ones(2)};
  ContainmentResult r = solve_containment(id);
  REQUIRE(r.status == ContainmentStatus::kContained);
  CHECK((r.certificate->E - I).cwiseAbs().maxCoeff() < 1e-8);

  ContainmentProblem scaled{I, Vector::Ones(2), 2 * I, 2 * Vector::Ones(2)};
  r = solve_containment(scaled);
  REQUIRE(r.status == ContainmentStatus::kContained);
  CHECK((r.certificate->E - 2 * I).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("unit box inside a half-plane") {
  const HPolyhedron box = unit_box(2);
  ContainmentProblem p{box.A(), box.b(), mat(1, 2, {1, 1}), vecof({3})};
  const FarkasCertificate hand{mat(1, 4, {1, 0, 1, 0})};
  const CertificateReport rep = verify_certificate(p, hand);
  CHECK(rep.passed);
  CHECK(hand.E * box.b() == Matrix::Constant(1, 1, 2.0));
  CHECK(solve_containment(p).status == ContainmentStatus::kContained);
  p.d(0) = 1.5;
  CHECK(solve_containment(p).status == ContainmentStatus::kNotContained);
}

TEST_CASE("containment LP layout") {
  const HPolyhedron box = unit_box(2);
  ContainmentProblem p{box.A(), box.b(), mat(1, 2, {1, 1}), vecof({3})};
  const LinearProgram lp = build_containment_lp(p);
  CHECK(lp.num_vars == 4);
  CHECK(lp.num_eq() == 2);
  CHECK(lp.num_ineq() == 1);
  for (auto d : lp.domains) CHECK(d == VarDomain::kNonnegative);
}

TEST_CASE("verification reports") {
  const Matrix I = Matrix::Identity(2, 2);
  ContainmentProblem id{I, Vector::Ones(2), I, Vector::Ones(2)};
  CertificateReport rep = verify_certificate(id, {I});
  CHECK(rep.passed);
  CHECK(rep.sign_violation == 0.0);
  CHECK(rep.equality_residual == 0.0);
  CHECK(rep.inequality_violation <= 0.0);
  Matrix E = I;
  E(0, 1) = -1e-3;
  rep = verify_certificate(id, {E});
  CHECK_FALSE(rep.passed);
  CHECK(rep.sign_violation == doctest::Approx(1e-3));
}

TEST_CASE("degenerate alternative") {
  CHECK(no_degenerate_alternative(Matrix::Identity(1, 1), Vector::Ones(1)));
  CHECK_FALSE(no_degenerate_alternative(mat(2, 1, {1, -1}), vecof({-1, -1})));
}

TEST_CASE("certificate round trip over random feasible instances") {
  int feasible = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.index(3));
    const HPolyhedron P = random_c_set(n, rng, 2);
    // Outer set: every row loosened so containment holds by construction.
    const Matrix B = random_matrix(4, n, rng);
    Vector d(4);
    const auto verts = brute_vertices(P.A(), P.b());
    for (Eigen::Index i = 0; i < 4; ++i) {
      double mx = -1e300;
      for (const auto& v : verts) mx = std::max(mx, B.row(i).dot(v));
      d(i) = mx + rng.uniform(0.0, 0.3);
    }
    const ContainmentProblem prob{P.A(), P.b(), B, d};
    const ContainmentResult r = solve_containment(prob);
    REQUIRE(r.status == ContainmentStatus::kContained);
    const DirectCheck dc = direct_check(prob, r.certificate->E);
    CHECK(dc.min_entry >= -1e-6);
    CHECK(dc.eq_residual <= 1e-6 * std::max(1.0, inf_norm(B)));
    CHECK(dc.ineq_excess <= 1e-6 * std::max(1.0, inf_norm(B)));
    CHECK(verify_certificate(prob, *r.certificate, 1e-6).passed);
    ++feasible;
  }
  CHECK(feasible == 100);
}

TEST_CASE("containment verdict agrees with sampling and vertices") {
  int yes = 0, no = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(1000 + seed);
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.index(2));
    const HPolyhedron inner = random_c_set(n, rng, 2);
    const HPolyhedron outer(random_matrix(5, n, rng), Vector::Constant(5, rng.uniform(0.6, 2.5)));
    const ContainmentProblem prob{inner.A(), inner.b(), outer.A(), outer.b()};
    const ContainmentResult r = solve_containment(prob);
    REQUIRE(r.status != ContainmentStatus::kSolverFailure);
    if (r.status == ContainmentStatus::kContained) {
      ++yes;
      for (const Vector& x : hit_and_run(inner, 10000, rng, {50, 1})) {
        CHECK((outer.A() * x - outer.b()).maxCoeff() <= 1e-7);
      }
    } else {
      ++no;
      bool witness = false;
      for (const auto& v : brute_vertices(inner.A(), inner.b())) {
        witness |= (outer.A() * v - outer.b()).maxCoeff() > 0.0;
      }
      CHECK(witness);
    }
  }
  CHECK(yes > 0);
  CHECK(no > 0);
}

TEST_CASE("no degenerate alternative under nonemptiness") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(2000 + seed);
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.index(3));
    const Matrix A = random_matrix(2 * n + 2, n, rng);
    const Vector x0 = random_matrix(n, 1, rng);
    Vector c = A * x0;
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) += rng.uniform(0.0, 1.0);
    REQUIRE(check_nonempty(HPolyhedron(A, c)).nonempty);
    CHECK(no_degenerate_alternative(A, c));
  }
}

TEST_CASE("certificate files round trip") {
  const auto dir = scratch_dir("farkas_io");
  Rng rng(4);
  const HPolyhedron P = random_c_set(2, rng);
  const ContainmentProblem prob{P.A(), P.b(), P.A(), 1.5 * P.b()};
  const ContainmentResult r = solve_containment(prob);
  REQUIRE(r.certificate);
  write_certificate(dir / "cert", prob, *r.certificate, *r.report);
  const FarkasCertificate back = read_certificate(dir / "cert");
  CHECK((back.E - r.certificate->E).cwiseAbs().maxCoeff() == 0.0);
  const Json meta = read_json(dir / "cert.json");
  CHECK(meta.at("report").at("passed").get<bool>());
  CHECK(meta.at("rows") == r.certificate->E.rows());
}

}  // TEST_SUITE

#include <doctest.h>

#include "ddinv/platoon.hpp"
#include "ddinv/synthesis.hpp"
#include "ddinv/verify.hpp"
#include "helpers.hpp"

using namespace ddinv;
using namespace ddinv::test;

namespace {

HPolyhedron vt_rows_of(const SynthesisResult& r, const ExperimentData& data, const DisturbanceSet& dist) {
  const HPolyhedron full = stacked_consistency_rows(data, dist);
  return r.vt_row_map.empty() ? full : full.select_rows(r.vt_row_map);
}

}  // namespace

TEST_SUITE("synthesis") {

TEST_CASE("model-based platoon at 0.06 and 0.07") {
  const PlatoonModel pm = make_platoon();
  const SynthesisResult ok = synthesize_model_based(pm.A, pm.B, pm.S, {pm.D, 0.06});
  REQUIRE(ok.feasible());
  CHECK(ok.certificates_passed);
  CHECK(ok.K->rows() == 2);
  CHECK(ok.K->cols() == 3);
  CHECK(reverify(ok));
  CHECK(check_invariance_exact(pm.A, pm.B, *ok.K, pm.S, {pm.D, 0.06}).invariant);
  const SynthesisResult no = synthesize_model_based(pm.A, pm.B, pm.S, {pm.D, 0.07});
  CHECK(no.status == SynthesisStatus::kInfeasible);
  CHECK_FALSE(no.K.has_value());
}

TEST_CASE("scalar system without actuation cannot contract") {
  const SynthesisResult r = synthesize_model_based(mat(1, 1, {2}), mat(1, 1, {0}), unit_box(1), {box_rows(1), 0.0});
  CHECK(r.status == SynthesisStatus::kInfeasible);
}

TEST_CASE("data-based platoon") {
  const PlatoonModel pm = make_platoon();
  const ExperimentData d = generate_platoon_data(pm, 600, 0.02, 0);
  const SynthesisResult ok = synthesize_thm1(d, pm.S, {pm.D, 0.02});
  REQUIRE(ok.feasible());
  CHECK(ok.certificates_passed);
  CHECK(ok.certificates.size() == 8);
  CHECK(ok.diagnostics.vt_rows_full == 600 * 6);
  CHECK(ok.diagnostics.vt_rows_used < ok.diagnostics.vt_rows_full);
  CHECK(reverify(ok));
  for (const auto& c : ok.certificates) {
    const ContainmentProblem p = thm1_vertex_problem(c.point, *ok.K, pm.S, {pm.D, 0.02}, vt_rows_of(ok, d, {pm.D, 0.02}));
    const DirectCheck dc = direct_check(p, c.certificate.E);
    CHECK(dc.min_entry >= -1e-6);
    CHECK(dc.eq_residual <= 1e-6 * std::max(1.0, inf_norm(p.B)));
    CHECK(dc.ineq_excess <= 1e-6);
  }
  const ExperimentData d7 = generate_platoon_data(pm, 600, 0.07, 0);
  CHECK(synthesize_thm1(d7, pm.S, {pm.D, 0.07}).status == SynthesisStatus::kInfeasible);
}

TEST_CASE("full and minimal representations agree") {
  const PlatoonModel pm = make_platoon();
  const ExperimentData d = generate_platoon_data(pm, 120, 0.03, 1);
  SynthesisOptions full, minimal;
  full.representation = Representation::kFull;
  minimal.representation = Representation::kMinimal;
  const SynthesisResult a = synthesize_thm1(d, pm.S, {pm.D, 0.03}, std::nullopt, full);
  const SynthesisResult b = synthesize_thm1(d, pm.S, {pm.D, 0.03}, std::nullopt, minimal);
  CHECK(a.status == b.status);
  CHECK(a.diagnostics.vt_rows_used == a.diagnostics.vt_rows_full);
  CHECK(b.diagnostics.vt_rows_used < a.diagnostics.vt_rows_used);
}

TEST_CASE("unbounded S is rejected") {
  const ExperimentData d = generate_platoon_data(make_platoon(), 20, 0.01, 0);
  const HPolyhedron half(mat(1, 3, {1, 0, 0}), Vector::Ones(1));
  try {
    synthesize_thm1(d, half, {box_rows(3), 0.01});
    FAIL("expected a precondition error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("bounded") != std::string::npos);
  }
}

TEST_CASE("singleton consistency set reduces to the model-based LP") {
  const PlatoonModel pm = make_platoon();
  Matrix AB(3, 5);
  AB << pm.A, pm.B;
  const VPolytope one({vec(AB)}, 15);
  for (double delta : {0.03, 0.07}) {
    const SynthesisResult mb = synthesize_model_based(pm.A, pm.B, pm.S, {pm.D, delta});
    const SynthesisResult t2 = synthesize_thm2(one, 3, 2, pm.S, {pm.D, delta});
    CHECK(mb.status == t2.status);
    CHECK(mb.diagnostics.num_vars == t2.diagnostics.num_vars);
    CHECK(mb.diagnostics.num_eq == t2.diagnostics.num_eq);
    CHECK(mb.diagnostics.num_ineq == t2.diagnostics.num_ineq);
  }
  CHECK_THROWS_AS(synthesize_thm2(VPolytope({}, 15), 3, 2, pm.S, {pm.D, 0.03}), std::invalid_argument);
  CHECK_THROWS_AS(synthesize_thm2(one, 3, 1, pm.S, {pm.D, 0.03}), std::invalid_argument);
}

TEST_CASE("rank-deficient data gives an unbounded consistency set") {
  const ExperimentData d = simulate_experiment(mat(1, 1, {0.5}), mat(1, 1, {1}), vecof({0}), Matrix::Zero(1, 4),
                                               mat(1, 4, {0.01, -0.01, 0.0, 0.01}));
  const ConsistencySet vt = build_consistency_set(d, {box_rows(1), 0.02}, false);
  CHECK_FALSE(is_bounded_general(vt.H));
  CHECK_THROWS(enumerate_vertices(vt.H));
}

TEST_CASE("tiny instance: both data-based formulations agree") {
  Rng rng(77);
  const ExperimentData d = generate_experiment(mat(1, 1, {1.05}), mat(1, 1, {0.8}), Vector::Zero(1), 3, 5, -1, 1,
                                               {box_rows(1), 0.1}, false);
  for (double delta : {0.1, 0.6}) {
    const DisturbanceSet dist{box_rows(1), delta};
    const ConsistencySet vt = build_consistency_set(d, dist, true);
    const SynthesisResult t1 = synthesize_thm1(d, unit_box(1), dist);
    const SynthesisResult t2 = synthesize_thm2(enumerate_vertices(vt.H), 1, 1, unit_box(1), dist);
    CHECK(t1.status == t2.status);
  }
}

TEST_CASE("bisection") {
  const PlatoonModel pm = make_platoon();
  auto closure = [&](double delta) { return synthesize_model_based(pm.A, pm.B, pm.S, {pm.D, delta}); };
  const BisectionResult b = max_delta_bisection(closure, 0.0, 0.1, 0.0025);
  CHECK(b.feasible_at_lo);
  CHECK(b.delta_star >= 0.06);
  CHECK(b.delta_star <= 0.065);
  REQUIRE(b.at_star);
  CHECK(b.at_star->feasible());
  const BisectionResult single = max_delta_bisection(closure, 0.03, 0.03, 0.0025);
  CHECK(single.probes.size() == 1);
  CHECK(single.delta_star == 0.03);
  const BisectionResult none = max_delta_bisection(closure, 0.08, 0.1, 0.0025);
  CHECK_FALSE(none.feasible_at_lo);
}

TEST_CASE("vertex constraint is affine in the gain") {
  const PlatoonModel pm = make_platoon();
  const ExperimentData d = generate_platoon_data(pm, 30, 0.02, 3);
  const DisturbanceSet dist{pm.D, 0.02};
  const HPolyhedron rows = stacked_consistency_rows(d, dist);
  Rng rng(2);
  const Matrix K = random_matrix(2, 3, rng);
  const Vector x = enumerate_vertices(pm.S).vertices()[2];
  const Matrix B0 = thm1_vertex_problem(x, Matrix::Zero(2, 3), pm.S, dist, rows).B;
  const Matrix B1 = thm1_vertex_problem(x, K, pm.S, dist, rows).B;
  const Matrix B2 = thm1_vertex_problem(x, 2 * K, pm.S, dist, rows).B;
  CHECK((B2 - 2 * B1 + B0).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, inf_norm(B2)));
  CHECK(thm1_vertex_problem(x, K, pm.S, dist, rows).A.rows() == dist.n_d() + rows.num_constraints());
}

TEST_CASE("convex combinations of vertex certificates certify interior points") {
  const PlatoonModel pm = make_platoon();
  const DisturbanceSet dist{pm.D, 0.01};
  const ExperimentData d = generate_platoon_data(pm, 300, 0.01, 8);
  const SynthesisResult r = synthesize_thm1(d, pm.S, dist);
  REQUIRE(r.feasible());
  const HPolyhedron rows = vt_rows_of(r, d, dist);
  Rng rng(5);
  for (int s = 0; s < 100; ++s) {
    std::vector<double> w(r.certificates.size());
    double total = 0.0;
    for (double& a : w) total += (a = -std::log(rng.uniform(1e-12, 1.0)));
    Vector x = Vector::Zero(3);
    Matrix E = Matrix::Zero(r.certificates[0].certificate.E.rows(), r.certificates[0].certificate.E.cols());
    for (std::size_t j = 0; j < w.size(); ++j) {
      x += (w[j] / total) * r.certificates[j].point;
      E += (w[j] / total) * r.certificates[j].certificate.E;
    }
    CHECK(contains(pm.S, x));
    CHECK(verify_certificate(thm1_vertex_problem(x, *r.K, pm.S, dist, rows), {E}).passed);
  }
}

TEST_CASE("feasibility is monotone in T on nested data") {
  const PlatoonModel pm = make_platoon();
  const DisturbanceSet dist{pm.D, 0.01};
  const ExperimentData big = generate_platoon_data(pm, 400, 0.01, 12);
  bool seen_feasible = false, seen_infeasible = false;
  for (Eigen::Index T : {25, 50, 100, 200, 400}) {
    const SynthesisResult r = synthesize_thm1(big.prefix(T), pm.S, dist);
    if (seen_feasible) CHECK(r.feasible());
    seen_feasible |= r.feasible();
    seen_infeasible |= !r.feasible();
    if (r.feasible()) {
      // The same gain stays valid for every longer record.
      const ConsistencySet vt = build_consistency_set(big, dist, true);
      CHECK(check_invariance_consistent_models_samples(*r.K, vt, pm.S, dist, 50, 1).passed());
    }
  }
  CHECK(seen_feasible);
  CHECK(seen_infeasible);
}

TEST_CASE("input constraint block") {
  const PlatoonModel pm = make_platoon();
  const HPolyhedron U(box_rows(2), Vector::Constant(4, 100.0));
  const DisturbanceSet dist{pm.D, 0.02};
  const SynthesisResult mb = synthesize_model_based(pm.A, pm.B, pm.S, dist, U);
  REQUIRE(mb.feasible());
  const ExperimentData d = generate_platoon_data(pm, 600, 0.02, 0);
  const SynthesisResult db = synthesize_thm1(d, pm.S, dist, U);
  REQUIRE(db.feasible());
  for (const SynthesisResult* r : {&mb, &db}) {
    bool has_input = false;
    for (const auto& c : r->certificates) has_input |= c.kind == "input";
    CHECK(has_input);
    const VPolytope V = enumerate_vertices(pm.S);
    for (const Vector& x : V.vertices()) {
      CHECK((U.A() * (*r->K * x) - U.b()).maxCoeff() <= 1e-7);
    }
  }
  const HPolyhedron tight(box_rows(2), Vector::Constant(4, 1e-4));
  CHECK(synthesize_model_based(pm.A, pm.B, pm.S, dist, tight).status == SynthesisStatus::kInfeasible);
}

TEST_CASE("variable budget") {
  const PlatoonModel pm = make_platoon();
  const ExperimentData d = generate_platoon_data(pm, 200, 0.02, 0);
  SynthesisOptions opt;
  opt.max_variables = 1000;
  opt.representation = Representation::kFull;
  try {
    synthesize_thm1(d, pm.S, {pm.D, 0.02}, std::nullopt, opt);
    FAIL("expected ProblemTooLarge");
  } catch (const ProblemTooLarge& e) {
    CHECK(std::string(e.what()).find("1000") != std::string::npos);
  }
}

TEST_CASE("margin mode maximizes slack") {
  const PlatoonModel pm = make_platoon();
  SynthesisOptions opt;
  opt.margin = true;
  const SynthesisResult r = synthesize_model_based(pm.A, pm.B, pm.S, {pm.D, 0.03}, std::nullopt, opt);
  REQUIRE(r.feasible());
  REQUIRE(r.margin);
  CHECK(*r.margin > 0.0);
  CHECK(*r.margin <= 1.0);
  CHECK(r.certificates_passed);
  // A positive margin survives a proportionally larger disturbance.
  const SynthesisResult tight = synthesize_model_based(pm.A, pm.B, pm.S, {pm.D, 0.0}, std::nullopt, opt);
  REQUIRE(tight.margin);
  CHECK(*tight.margin >= *r.margin - 1e-7);
}

TEST_CASE("results on disk") {
  const auto dir = scratch_dir("synthesis_io");
  const PlatoonModel pm = make_platoon();
  const ExperimentData d = generate_platoon_data(pm, 300, 0.01, 8);
  const SynthesisResult r = synthesize_thm1(d, pm.S, {pm.D, 0.01});
  REQUIRE(r.feasible());
  write_synthesis_result(dir, r, Json{{"seed", 0}});
  CHECK(read_matrix_csv(dir / "K.csv") == *r.K);
  const Json j = read_json(dir / "result.json");
  CHECK(j.at("status") == "feasible");
  CHECK(j.at("config").at("seed") == 0);
  CHECK(j.at("certificates").size() == r.certificates.size());
  for (const auto& c : j.at("certificates")) CHECK(std::filesystem::exists(dir / c.at("file").get<std::string>()));
}

}  // TEST_SUITE

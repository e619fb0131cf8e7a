#include <doctest.h>

#include "ddinv/platoon.hpp"
#include "ddinv/synthesis.hpp"
#include "ddinv/verify.hpp"
#include "helpers.hpp"

using namespace ddinv;
using namespace ddinv::test;

TEST_SUITE("verify") {

TEST_CASE("exact invariance checks") {
  Rng rng(1);
  const HPolyhedron S = random_c_set(2, rng);
  CHECK(check_invariance_exact(Matrix::Zero(2, 2), Matrix::Zero(2, 1), Matrix::Zero(1, 2), S, {box_rows(2), 0.0}).invariant);
  const InvarianceResult r = check_invariance_exact(mat(1, 1, {1}), mat(1, 1, {1}), mat(1, 1, {-0.5}), unit_box(1),
                                                    {box_rows(1), 0.4});
  CHECK(r.invariant);
  REQUIRE(r.certificate);
  CHECK(r.report->passed);
  CHECK_FALSE(check_invariance_exact(mat(1, 1, {1}), mat(1, 1, {1}), mat(1, 1, {-0.5}), unit_box(1),
                                     {box_rows(1), 0.6}).invariant);
}

TEST_CASE("model-based gain is invariant at 0.0625") {
  const PlatoonModel pm = make_platoon();
  const SynthesisResult r = synthesize_model_based(pm.A, pm.B, pm.S, {pm.D, 0.0625});
  REQUIRE(r.feasible());
  CHECK(check_invariance_exact(pm.A, pm.B, *r.K, pm.S, {pm.D, 0.0625}).invariant);
}

TEST_CASE("oracle examples") {
  CHECK(brute_force_invariance_oracle(Matrix::Zero(2, 2), unit_box(2), {box_rows(2), 0.0}));
  CHECK(brute_force_invariance_oracle(0.5 * Matrix::Identity(2, 2), unit_box(2), {box_rows(2), 0.4}));
  CHECK_FALSE(brute_force_invariance_oracle(0.5 * Matrix::Identity(2, 2), unit_box(2), {box_rows(2), 0.6}));
  CHECK_THROWS(brute_force_invariance_oracle(Matrix::Identity(4, 4), unit_box(4), {box_rows(4), 0.1}));
}

TEST_CASE("oracle agrees with the exact check on random instances") {
  int yes = 0, no = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    Rng rng(500 + seed);
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(seed % 2);
    const HPolyhedron S = random_c_set(n, rng, 1);
    const Matrix F = random_matrix(n, n, rng, -0.8, 0.8);
    const DisturbanceSet dist{box_rows(n), rng.uniform(0.0, 0.5)};
    const bool exact = check_invariance_exact(F, Matrix::Zero(n, 1), Matrix::Zero(1, n), S, dist).invariant;
    CHECK(exact == brute_force_invariance_oracle(F, S, dist));
    (exact ? yes : no)++;
  }
  CHECK(yes > 0);
  CHECK(no > 0);
}

TEST_CASE("consistent-model checks") {
  const ExperimentData d = generate_experiment(mat(1, 1, {1.05}), mat(1, 1, {0.8}), Vector::Zero(1), 4, 2, -1, 1,
                                               {box_rows(1), 0.1}, false);
  const DisturbanceSet dist{box_rows(1), 0.1};
  const SynthesisResult r = synthesize_thm1(d, unit_box(1), dist);
  REQUIRE(r.feasible());
  const ConsistencySet vt = build_consistency_set(d, dist, true);
  const ModelCheckReport vr = check_invariance_consistent_models_vertices(*r.K, vt, unit_box(1), dist);
  CHECK(vr.passed());
  CHECK(vr.checked == enumerate_vertices(vt.H).size());
  CHECK(check_invariance_consistent_models_samples(*r.K, vt, unit_box(1), dist, 100, 3).passed());

  const PlatoonModel pm = make_platoon();
  const ExperimentData pd = generate_platoon_data(pm, 300, 0.05, 0);
  const DisturbanceSet pdist{pm.D, 0.05};
  const ConsistencySet pvt = build_consistency_set(pd, pdist, true);
  const ModelCheckReport zero = check_invariance_consistent_models_samples(Matrix::Zero(2, 3), pvt, pm.S, pdist, 100, 0);
  CHECK(zero.checked == 100);
  CHECK(zero.violations > 0);
  REQUIRE(zero.worst);
  CHECK(zero.worst->violation > 0.0);
  CHECK(zero.to_json().at("seed") == 0);

  Matrix AB(3, 5);
  AB << pm.A, pm.B;
  const VPolytope single({vec(AB)}, 15);
  const Matrix K = *synthesize_model_based(pm.A, pm.B, pm.S, {pm.D, 0.05}).K;
  for (const Matrix& G : {K, Matrix(Matrix::Zero(2, 3))}) {
    CHECK(check_invariance_consistent_models(G, single, 3, 2, pm.S, pdist).passed() ==
          check_invariance_exact(pm.A, pm.B, G, pm.S, pdist).invariant);
  }
}

TEST_CASE("zero policy from the origin") {
  const Trajectory t = simulate_closed_loop(0.5 * Matrix::Identity(2, 2), Matrix::Zero(2, 1), Matrix::Zero(1, 2),
                                            Vector::Zero(2), {box_rows(2), 0.1}, 50, DisturbancePolicy::zero(), unit_box(2));
  CHECK(t.states.size() == 51);
  CHECK(t.disturbances.size() == 50);
  for (const auto& x : t.states) CHECK(x.isZero(0));
  CHECK_FALSE(t.first_exit_step.has_value());
}

TEST_CASE("platoon trajectories") {
  const PlatoonModel pm = make_platoon();
  const DisturbanceSet dist{pm.D, 0.05};
  const ExperimentData d = generate_platoon_data(pm, 1600, 0.05, 0);
  const SynthesisResult r = synthesize_thm1(d, pm.S, dist);
  REQUIRE(r.feasible());
  const auto verts = enumerate_vertices(pm.S).vertices();
  for (std::size_t j = 0; j < verts.size(); ++j) {
    const Trajectory t = simulate_closed_loop(pm.A, pm.B, *r.K, verts[j], dist, 1000,
                                              DisturbancePolicy::vertex_random(j), pm.S);
    CHECK_FALSE(t.first_exit_step.has_value());
    for (const auto& w : t.disturbances) CHECK((w.cwiseAbs().array() == 0.05).all());
  }
  bool exited = false;
  for (std::size_t j = 0; j < verts.size(); ++j) {
    const Trajectory t = simulate_closed_loop(pm.A, pm.B, Matrix::Zero(2, 3), verts[j], {pm.D, 0.0625}, 1000,
                                              DisturbancePolicy::vertex_random(j), pm.S);
    exited |= t.first_exit_step.has_value();
  }
  CHECK(exited);
}

TEST_CASE("replay reproduces states bit-exactly") {
  const PlatoonModel pm = make_platoon();
  const DisturbanceSet dist{pm.D, 0.05};
  const Matrix K = *synthesize_model_based(pm.A, pm.B, pm.S, dist).K;
  const Trajectory t = simulate_closed_loop(pm.A, pm.B, K, Vector::Zero(3), dist, 300,
                                            DisturbancePolicy::vertex_random(4), pm.S);
  const Trajectory back = replay(t.F, t.states[0], t.disturbances, pm.S);
  REQUIRE(back.states.size() == t.states.size());
  for (std::size_t k = 0; k < t.states.size(); ++k) CHECK((back.states[k].array() == t.states[k].array()).all());
  for (std::size_t k = 0; k + 1 < t.states.size(); ++k) {
    CHECK(((t.F * t.states[k] + t.disturbances[k]).array() == t.states[k + 1].array()).all());
  }
}

TEST_CASE("one-step invariance holds over long horizons") {
  const PlatoonModel pm = make_platoon();
  const DisturbanceSet dist{pm.D, 0.06};
  const Matrix K = *synthesize_model_based(pm.A, pm.B, pm.S, dist).K;
  REQUIRE(check_invariance_exact(pm.A, pm.B, K, pm.S, dist).invariant);
  const VPolytope V = enumerate_vertices(pm.S);
  for (const Vector& x : V.vertices()) {
    const Trajectory t = simulate_closed_loop(pm.A, pm.B, K, x, dist, 10000, DisturbancePolicy::vertex_random(9), pm.S);
    CHECK_FALSE(t.first_exit_step.has_value());
  }
}

TEST_CASE("custom policy, warnings and CSV export") {
  const auto dir = scratch_dir("verify_traj");
  auto push = DisturbancePolicy::callback([](Eigen::Index, const Vector& x) { return Vector(0.4 * x.cwiseSign()); });
  const Trajectory t = simulate_closed_loop(mat(1, 1, {1}), mat(1, 1, {0}), mat(1, 1, {0}), vecof({0.5}),
                                            {box_rows(1), 0.4}, 5, push, unit_box(1));
  REQUIRE(t.first_exit_step);
  CHECK(*t.first_exit_step == 2);
  CHECK(t.contained[1]);
  CHECK_FALSE(t.contained[2]);
  const Trajectory outside = simulate_closed_loop(mat(1, 1, {0}), mat(1, 1, {0}), mat(1, 1, {0}), vecof({3}),
                                                  {box_rows(1), 0.1}, 2, DisturbancePolicy::zero(), unit_box(1));
  CHECK_FALSE(outside.warning.empty());
  t.write_csv(dir / "t.csv");
  const std::string csv = slurp(dir / "t.csv");
  CHECK(csv.rfind("step,x1,d1,contained\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
  CHECK_THROWS(simulate_closed_loop(mat(1, 1, {0}), mat(1, 1, {0}), mat(1, 1, {0}), vecof({0}),
                                    {mat(1, 1, {1}), 0.1}, 2, DisturbancePolicy::vertex_random(0), unit_box(1)));
}

}  // TEST_SUITE

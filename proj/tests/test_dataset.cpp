#include <doctest.h>

#include "ddinv/platoon.hpp"
#include "helpers.hpp"

using namespace ddinv;
using namespace ddinv::test;

namespace {

/// Min and max of coordinate k over P by LP.
std::pair<double, double> coordinate_range(const HPolyhedron& P, Eigen::Index k) {
  const Eigen::Index n = P.ambient_dim();
  LinearProgram lp(n);
  lp.ineq_matrix = P.A().sparseView().cast<double>();
  lp.ineq_rhs = P.b();
  lp.eq_matrix = SparseMatrix(0, n);
  lp.eq_rhs = Vector(0);
  lp.domains.assign(static_cast<std::size_t>(n), VarDomain::kFree);
  lp.objective = Vector::Unit(n, k);
  const double lo = solve(lp).x(k);
  lp.objective = -Vector::Unit(n, k);
  const double hi = solve(lp).x(k);
  return {lo, hi};
}

ExperimentData tiny_experiment(Eigen::Index n, Eigen::Index m, Eigen::Index T, double delta, Rng& rng) {
  const Matrix A = random_matrix(n, n, rng, -0.9, 0.9);
  const Matrix B = random_matrix(n, m, rng);
  return generate_experiment(A, B, Vector::Zero(n), T, rng.next(), -1.0, 1.0, {box_rows(n), delta}, false);
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("simulate_experiment") {
  const ExperimentData z = simulate_experiment(Matrix::Identity(2, 2), Matrix::Zero(2, 1), Vector::Zero(2),
                                               Matrix::Zero(1, 5), Matrix::Zero(2, 5));
  CHECK(z.X0.isZero(0));
  CHECK(z.X1.isZero(0));
  const ExperimentData d = simulate_experiment(mat(1, 1, {0.5}), mat(1, 1, {2}), vecof({1}),
                                               mat(1, 3, {1, 0, -1}), mat(1, 3, {0.1, 0, 0}));
  CHECK(d.X0 == mat(1, 3, {1, 2.6, 1.3}));
  CHECK(d.X1(0, 0) == doctest::Approx(2.6));
  CHECK(d.X1(0, 2) == doctest::Approx(-1.35));
  CHECK((d.X1.leftCols(2) - d.X0.rightCols(2)).isZero(0));
}

TEST_CASE("assemble_W0 and richness") {
  ExperimentData d{mat(1, 2, {3, 4}), mat(1, 2, {1, 2}), mat(1, 2, {0, 0}), std::nullopt};
  CHECK(assemble_W0(d) == mat(2, 2, {1, 2, 3, 4}));
  CHECK(richness_check(d).full_row_rank);

  const PlatoonModel pm = make_platoon();
  const ExperimentData pd = generate_platoon_data(pm, 1600, 0.05, 0);
  CHECK(assemble_W0(pd).rows() == 5);
  CHECK(assemble_W0(pd).cols() == 1600);
  const RichnessReport r = richness_check(pd);
  CHECK(r.full_row_rank);
  CHECK(r.rank == 5);
  const Eigen::JacobiSVD<Matrix> svd(assemble_W0(pd));
  CHECK(svd.singularValues()(4) > 1e-9 * svd.singularValues()(0));

  CHECK_FALSE(richness_check(pd.prefix(4)).full_row_rank);
  const ExperimentData still = simulate_experiment(pm.A, pm.B, Vector::Zero(3), Matrix::Zero(2, 20),
                                                   Matrix::Zero(3, 20));
  CHECK_FALSE(richness_check(still).full_row_rank);
}

TEST_CASE("stacked rows equal direct evaluation of D (X1 - V W0)") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.index(3));
    const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng.index(2));
    const Eigen::Index T = 1 + static_cast<Eigen::Index>(rng.index(8));
    const ExperimentData data{random_matrix(m, T, rng), random_matrix(n, T, rng), random_matrix(n, T, rng), std::nullopt};
    const DisturbanceSet dist{random_matrix(2 * n, n, rng), 0.3};
    const Matrix V = random_matrix(n, n + m, rng);
    const HPolyhedron H = stacked_consistency_rows(data, dist);
    const Vector lhs = H.A() * vec(V) - H.b();
    const Matrix R = dist.D * (data.X1 - V * assemble_W0(data));
    const Eigen::Index nd = dist.n_d();
    double err = 0.0;
    for (Eigen::Index i = 0; i < T; ++i) {
      const Vector direct = R.col(i) - Vector::Constant(nd, dist.delta);
      err = std::max(err, (lhs.segment(i * nd, nd) - direct).cwiseAbs().maxCoeff());
    }
    CHECK(err <= 1e-12);
  }
}

TEST_CASE("noiseless scalar data pins down [a b]") {
  const Matrix inputs = mat(1, 4, {1.0, -0.5, 0.25, 2.0});
  const ExperimentData d = simulate_experiment(mat(1, 1, {0.8}), mat(1, 1, {1.5}), vecof({0.3}), inputs,
                                               Matrix::Zero(1, 4));
  const ConsistencySet vt = build_consistency_set(d, {box_rows(1), 0.0}, false);
  const Matrix W0 = assemble_W0(d);
  const Matrix ls = (W0 * W0.transpose()).ldlt().solve(W0 * d.X1.transpose()).transpose();
  CHECK(vt.contains_matrix(ls, 1e-9));
  for (Eigen::Index k = 0; k < 2; ++k) {
    const auto [lo, hi] = coordinate_range(vt.H, k);
    CHECK(lo == doctest::Approx(ls(0, k)).epsilon(1e-7));
    CHECK(hi == doctest::Approx(ls(0, k)).epsilon(1e-7));
  }
}

TEST_CASE("true system is consistent with its own data") {
  const PlatoonModel pm = make_platoon();
  const ExperimentData d = generate_platoon_data(pm, 400, 0.05, 2);
  const ConsistencySet vt = build_consistency_set(d, {pm.D, 0.05}, false);
  Matrix AB(3, 5);
  AB << pm.A, pm.B;
  CHECK(vt.contains_matrix(AB));
  CHECK(check_nonempty(vt.H).nonempty);
}

TEST_CASE("duplicate data columns are removed as redundant rows") {
  const Matrix inputs = mat(1, 6, {1, 1, -1, -1, 1, 1});
  // x0 = 0 with A = 0 makes every (x, u) pair repeat with the input.
  const ExperimentData d = simulate_experiment(mat(1, 1, {0}), mat(1, 1, {1}), vecof({0}), inputs,
                                               mat(1, 6, {0.01, 0.01, 0, 0, 0.01, 0.01}));
  const ConsistencySet full = build_consistency_set(d, {box_rows(1), 0.02}, false);
  const ConsistencySet red = build_consistency_set(d, {box_rows(1), 0.02}, true);
  CHECK(full.H.num_constraints() == 12);
  CHECK(red.H.num_constraints() < 12);
  CHECK(red.minimized);
  CHECK(red.row_map.size() == static_cast<std::size_t>(red.H.num_constraints()));
  Rng rng(1);
  for (int s = 0; s < 2000; ++s) {
    const Vector v = random_matrix(2, 1, rng, -0.5, 1.5);
    CHECK(contains(full.H, v, 1e-12) == contains(red.H, v, 1e-12));
  }
}

TEST_CASE("minimized and full consistency sets agree on membership") {
  const PlatoonModel pm = make_platoon();
  const ExperimentData d = generate_platoon_data(pm, 80, 0.03, 5);
  const DisturbanceSet dist{pm.D, 0.03};
  const ConsistencySet full = build_consistency_set(d, dist, false);
  const ConsistencySet red = build_consistency_set(d, dist, true);
  CHECK(red.H.num_constraints() < full.H.num_constraints());
  for (std::size_t k = 0; k < red.row_map.size(); ++k) {
    const Eigen::Index r = red.row_map[k];
    CHECK((red.H.A().row(static_cast<Eigen::Index>(k)) / red.H.b()(static_cast<Eigen::Index>(k)) -
           full.H.A().row(r) / full.H.b()(r)).cwiseAbs().maxCoeff() < 1e-9);
  }
  Rng rng(7);
  Matrix AB(3, 5);
  AB << pm.A, pm.B;
  const Vector center = vec(AB);
  // Half the points from inside V_T, half from a box around it.
  std::vector<Vector> pts = hit_and_run(full.H, 5000, rng, {200, 2});
  const Eigen::Index dim = center.size();
  while (pts.size() < 10000) pts.push_back(center + random_matrix(dim, 1, rng, -0.02, 0.02));
  int mismatches = 0;
  for (const Vector& v : pts) {
    const double slack = (full.H.A() * v - full.H.b()).maxCoeff();
    if (std::abs(slack) < 1e-9) continue;
    mismatches += contains(full.H, v, 0.0) != contains(red.H, v, 0.0);
  }
  CHECK(mismatches == 0);
}

TEST_CASE("nested datasets give nested consistency sets") {
  const PlatoonModel pm = make_platoon();
  const DisturbanceSet dist{pm.D, 0.04};
  const ExperimentData big = generate_platoon_data(pm, 41, 0.04, 9);
  for (Eigen::Index T : {10, 25, 40}) {
    const HPolyhedron small = stacked_consistency_rows(big.prefix(T), dist);
    const HPolyhedron larger = stacked_consistency_rows(big.prefix(T + 1), dist);
    Rng rng(static_cast<std::uint64_t>(T));
    int inside = 0;
    for (const Vector& v : hit_and_run(larger, 1000, rng, {100, 2})) {
      if (!contains(larger, v, 0.0)) continue;
      ++inside;
      CHECK(contains(small, v, 0.0));
    }
    CHECK(inside > 900);
  }
}

TEST_CASE("boundedness: rank conditions against the recession cone") {
  CHECK(consistency_bounded(generate_platoon_data(make_platoon(), 50, 0.01, 1),
                            {Matrix::Identity(3, 3), -Vector::Ones(3), Vector::Ones(3), 0.01}));
  Rng rng(17);
  int bounded = 0, unbounded = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const Eigen::Index n = 1 + trial % 2, m = 1;
    const Eigen::Index T = 1 + static_cast<Eigen::Index>(rng.index(4));
    ExperimentData d = tiny_experiment(n, m, T, 0.1, rng);
    if (trial % 5 == 0) d.U0.setZero();
    Matrix Dhat = Matrix::Identity(n, n);
    if (n == 2 && trial % 7 == 0) Dhat.row(1) = Dhat.row(0);
    const IntervalDisturbanceSet ids{Dhat, -Vector::Ones(n), Vector::Ones(n), 0.1};
    const bool by_rank = consistency_bounded(d, ids);
    const ConsistencySet vt = build_consistency_set(d, ids.to_disturbance_set(), false);
    CHECK(by_rank == is_bounded_general(vt.H));
    (by_rank ? bounded : unbounded)++;
  }
  CHECK(bounded > 0);
  CHECK(unbounded > 0);
  CHECK_FALSE(consistency_bounded(tiny_experiment(2, 1, 1, 0.1, rng),
                                  {Matrix::Identity(2, 2), -Vector::Ones(2), Vector::Ones(2), 0.1}));
}

TEST_CASE("random generators") {
  CHECK(random_inputs(2, 10, 0.0, 0.0, 3).isZero(0));
  CHECK(random_inputs(2, 10, -5, 5, 3) == random_inputs(2, 10, -5, 5, 3));
  CHECK(random_inputs(2, 10, -5, 5, 3) != random_inputs(2, 10, -5, 5, 4));
  const Matrix box = random_box_disturbances(3, 0.05, 500, 8);
  CHECK(box.cwiseAbs().maxCoeff() <= 0.05);
  CHECK(box.cwiseAbs().maxCoeff() > 0.045);
  const DisturbanceSet dist{box_rows(3), 0.05};
  const Matrix vx = random_vertex_disturbances(dist, 200, 8);
  CHECK((vx.cwiseAbs().array() == 0.05).all());
  CHECK(vx == random_vertex_disturbances(dist, 200, 8));
  const DisturbanceSet flat{mat(1, 2, {1, 0}), 0.05};
  CHECK_THROWS(random_vertex_disturbances(flat, 5, 1));
}

TEST_CASE("generated data is a prefix of longer data with the same seed") {
  const PlatoonModel pm = make_platoon();
  const ExperimentData a = generate_platoon_data(pm, 30, 0.05, 4);
  const ExperimentData b = generate_platoon_data(pm, 60, 0.05, 4);
  CHECK(a.X1 == b.X1.leftCols(30));
  CHECK(a.U0 == b.U0.leftCols(30));
  CHECK(a.U0.cwiseAbs().maxCoeff() <= 5.0);
  CHECK(a.D0->cwiseAbs().maxCoeff() <= 0.05);
}

TEST_CASE("dataset files round trip and never load D0") {
  const auto dir = scratch_dir("dataset_io");
  const ExperimentData d = generate_platoon_data(make_platoon(), 25, 0.05, 6);
  DatasetManifest man;
  man.seed = 6;
  man.delta = 0.05;
  man.generation_mode = "box";
  write_dataset(dir / "manifest.json", d, man);
  const ExperimentData back = read_dataset(dir / "manifest.json");
  CHECK(back.U0 == d.U0);
  CHECK(back.X0 == d.X0);
  CHECK(back.X1 == d.X1);
  CHECK_FALSE(back.D0.has_value());
  const Json j = read_json(dir / "manifest.json");
  CHECK(j.at("seed") == 6);
  CHECK(j.at("T") == 25);
  CHECK(DatasetManifest::from_json(j).to_json() == j);
}

TEST_CASE("malformed CSV reports the line") {
  const auto dir = scratch_dir("dataset_csv");
  {
    std::ofstream f(dir / "bad.csv");
    f << "1,2\n3,x\n";
  }
  try {
    read_matrix_csv(dir / "bad.csv");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
  {
    std::ofstream f(dir / "ragged.csv");
    f << "1,2\n3\n";
  }
  CHECK_THROWS_AS(read_matrix_csv(dir / "ragged.csv"), ParseError);
}

TEST_CASE("CSV round trip is exact") {
  const auto dir = scratch_dir("csv_exact");
  Rng rng(12);
  const Matrix M = random_matrix(7, 4, rng, -1e3, 1e3) / 3.0;
  write_matrix_csv(dir / "m.csv", M);
  CHECK(read_matrix_csv(dir / "m.csv") == M);
}

}  // TEST_SUITE

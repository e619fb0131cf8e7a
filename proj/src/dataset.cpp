#include "ddinv/dataset.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "ddinv/kernels.hpp"

namespace ddinv {

void ExperimentData::validate() const {
  if (X0.cols() != X1.cols() || U0.cols() != X0.cols()) {
    throw std::invalid_argument(fmt::format(
        "ExperimentData: column counts differ (U0 {}, X0 {}, X1 {})", U0.cols(), X0.cols(),
        X1.cols()));
  }
  if (X0.rows() != X1.rows()) {
    throw std::invalid_argument(
        fmt::format("ExperimentData: X0 has {} rows but X1 has {}", X0.rows(), X1.rows()));
  }
  if (X0.rows() < 1 || U0.rows() < 1 || X0.cols() < 1) {
    throw std::invalid_argument("ExperimentData: n, m and T must be positive");
  }
  if (D0 && (D0->rows() != X0.rows() || D0->cols() != X0.cols())) {
    throw std::invalid_argument("ExperimentData: D0 shape differs from X0");
  }
}

ExperimentData ExperimentData::prefix(Eigen::Index T) const {
  if (T < 1 || T > this->T()) throw std::invalid_argument("ExperimentData::prefix: bad length");
  ExperimentData out{U0.leftCols(T), X0.leftCols(T), X1.leftCols(T), std::nullopt};
  if (D0) out.D0 = D0->leftCols(T);
  return out;
}

HPolyhedron DisturbanceSet::polyhedron() const {
  return HPolyhedron(D, Vector::Constant(D.rows(), delta));
}

bool DisturbanceSet::contains(const Vector& d, double tol) const {
  return ddinv::contains(polyhedron(), d, tol);
}

void IntervalDisturbanceSet::validate() const {
  if (Dhat.rows() != d_lower.size() || Dhat.rows() != d_upper.size()) {
    throw std::invalid_argument("IntervalDisturbanceSet: bound length mismatch");
  }
  if ((d_lower.array() >= 0.0).any() || (d_upper.array() <= 0.0).any()) {
    throw std::invalid_argument("IntervalDisturbanceSet: need d_lower < 0 < d_upper");
  }
  if (delta < 0.0) throw std::invalid_argument("IntervalDisturbanceSet: negative delta");
}

DisturbanceSet IntervalDisturbanceSet::to_disturbance_set() const {
  validate();
  const Eigen::Index k = Dhat.rows();
  Matrix D(2 * k, Dhat.cols());
  for (Eigen::Index r = 0; r < k; ++r) {
    D.row(2 * r) = Dhat.row(r) / d_upper(r);
    D.row(2 * r + 1) = -Dhat.row(r) / (-d_lower(r));
  }
  return {D, delta};
}

TwoSidedPolyhedron IntervalDisturbanceSet::polyhedron() const {
  validate();
  return TwoSidedPolyhedron(Dhat, delta * d_lower, delta * d_upper);
}

bool ConsistencySet::contains_matrix(const Matrix& V, double tol) const {
  if (V.rows() != n || V.cols() != n + m) {
    throw std::invalid_argument(fmt::format("ConsistencySet: V must be {}x{}", n, n + m));
  }
  return contains(H, vec(V), tol);
}

ExperimentData simulate_experiment(const Matrix& A, const Matrix& B, const Vector& x0,
                                   const Matrix& inputs, const Matrix& disturbances) {
  const Eigen::Index n = A.rows();
  const Eigen::Index T = inputs.cols();
  if (A.cols() != n || B.rows() != n || x0.size() != n || inputs.rows() != B.cols() ||
      disturbances.rows() != n || disturbances.cols() != T) {
    throw std::invalid_argument(fmt::format(
        "simulate_experiment: dimension mismatch (A {}x{}, B {}x{}, x0 {}, inputs {}x{}, "
        "disturbances {}x{})",
        A.rows(), A.cols(), B.rows(), B.cols(), x0.size(), inputs.rows(), inputs.cols(),
        disturbances.rows(), disturbances.cols()));
  }
  ExperimentData data{inputs, Matrix(n, T), Matrix(n, T), disturbances};
  Vector x = x0;
  for (Eigen::Index k = 0; k < T; ++k) {
    data.X0.col(k) = x;
    x = A * x + B * inputs.col(k) + disturbances.col(k);
    data.X1.col(k) = x;
  }
  return data;
}

Matrix assemble_W0(const ExperimentData& data) {
  data.validate();
  Matrix W0(data.n() + data.m(), data.T());
  W0 << data.X0, data.U0;
  return W0;
}

RichnessReport richness_check(const ExperimentData& data, double rank_tol) {
  const Eigen::Index r = numerical_rank(assemble_W0(data), rank_tol);
  return {r == data.n() + data.m(), r};
}

HPolyhedron stacked_consistency_rows(const ExperimentData& data, const DisturbanceSet& dist) {
  data.validate();
  if (dist.n() != data.n()) {
    throw std::invalid_argument(fmt::format(
        "consistency set: disturbance set lives in R^{} but the state has dimension {}",
        dist.n(), data.n()));
  }
  kernels::StackedRows rows =
      kernels::parallel::assemble_consistency_rows(assemble_W0(data), data.X1, dist.D, dist.delta);
  return HPolyhedron(std::move(rows.G), std::move(rows.h));
}

ConsistencySet build_consistency_set(const ExperimentData& data, const DisturbanceSet& dist,
                                     bool minimize, const RedundancyOptions& options) {
  HPolyhedron full = stacked_consistency_rows(data, dist);
  if (!minimize) {
    std::vector<Eigen::Index> map(static_cast<std::size_t>(full.num_constraints()));
    std::iota(map.begin(), map.end(), Eigen::Index{0});
    return {std::move(full), data.n(), data.m(), data.T(), std::move(map), false};
  }
  RedundancyResult reduced = remove_redundant(full, options);
  return {std::move(reduced.polyhedron), data.n(), data.m(), data.T(),
          std::move(reduced.kept_rows), true};
}

bool consistency_bounded(const ExperimentData& data, const IntervalDisturbanceSet& dist,
                         double rank_tol) {
  dist.validate();
  return richness_check(data, rank_tol).full_row_rank &&
         numerical_rank(dist.Dhat, rank_tol) == data.n();
}

Matrix random_inputs(Eigen::Index m, Eigen::Index T, double lo, double hi, Rng& rng) {
  if (lo > hi) throw std::invalid_argument("random_inputs: empty range");
  Matrix U(m, T);
  for (Eigen::Index k = 0; k < T; ++k) {
    for (Eigen::Index i = 0; i < m; ++i) U(i, k) = rng.uniform(lo, hi);
  }
  return U;
}

Matrix random_inputs(Eigen::Index m, Eigen::Index T, double lo, double hi, std::uint64_t seed) {
  Rng rng(seed);
  return random_inputs(m, T, lo, hi, rng);
}

Matrix random_vertex_disturbances(const DisturbanceSet& dist, Eigen::Index T, Rng& rng) {
  const VPolytope verts = enumerate_vertices(dist.polyhedron());
  Matrix out(dist.n(), T);
  for (Eigen::Index k = 0; k < T; ++k) out.col(k) = verts.vertices()[rng.index(verts.size())];
  return out;
}

Matrix random_vertex_disturbances(const DisturbanceSet& dist, Eigen::Index T, std::uint64_t seed) {
  Rng rng(seed);
  return random_vertex_disturbances(dist, T, rng);
}

Matrix random_box_disturbances(Eigen::Index n, double delta, Eigen::Index T, Rng& rng) {
  if (delta < 0.0) throw std::invalid_argument("random_box_disturbances: negative delta");
  Matrix out(n, T);
  for (Eigen::Index k = 0; k < T; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) out(i, k) = delta * rng.uniform(-1.0, 1.0);
  }
  return out;
}

Matrix random_box_disturbances(Eigen::Index n, double delta, Eigen::Index T, std::uint64_t seed) {
  Rng rng(seed);
  return random_box_disturbances(n, delta, T, rng);
}

ExperimentData generate_experiment(const Matrix& A, const Matrix& B, const Vector& x0,
                                   Eigen::Index T, std::uint64_t seed, double input_low,
                                   double input_high, const DisturbanceSet& dist, bool vertex_mode) {
  const Eigen::Index n = A.rows(), m = B.cols();
  if (input_low > input_high) throw std::invalid_argument("generate_experiment: empty input range");
  if (dist.n() != n) throw std::invalid_argument("generate_experiment: disturbance dimension mismatch");
  std::vector<Vector> verts;
  if (vertex_mode) verts = enumerate_vertices(dist.polyhedron()).vertices();
  Rng rng(seed);
  Matrix U(m, T), W(n, T);
  for (Eigen::Index k = 0; k < T; ++k) {
    for (Eigen::Index i = 0; i < m; ++i) U(i, k) = rng.uniform(input_low, input_high);
    if (vertex_mode) {
      W.col(k) = verts[rng.index(verts.size())];
    } else {
      for (Eigen::Index i = 0; i < n; ++i) W(i, k) = dist.delta * rng.uniform(-1.0, 1.0);
    }
  }
  return simulate_experiment(A, B, x0, U, W);
}

Json DatasetManifest::to_json() const {
  Json j{{"n", n}, {"m", m}, {"T", T}, {"generation_mode", generation_mode}};
  j["seed"] = seed ? Json(*seed) : Json(nullptr);
  j["delta"] = delta ? Json(*delta) : Json(nullptr);
  j["files"] = Json{{"U0", U0}, {"X0", X0}, {"X1", X1}};
  if (D0) j["files"]["D0"] = *D0;
  return j;
}

DatasetManifest DatasetManifest::from_json(const Json& j) {
  DatasetManifest m;
  try {
    m.n = j.at("n").get<Eigen::Index>();
    m.m = j.at("m").get<Eigen::Index>();
    m.T = j.at("T").get<Eigen::Index>();
    if (j.contains("seed") && !j["seed"].is_null()) m.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("delta") && !j["delta"].is_null()) m.delta = j["delta"].get<double>();
    m.generation_mode = j.value("generation_mode", std::string("external"));
    const Json& files = j.at("files");
    m.U0 = files.at("U0").get<std::string>();
    m.X0 = files.at("X0").get<std::string>();
    m.X1 = files.at("X1").get<std::string>();
    if (files.contains("D0")) m.D0 = files["D0"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("dataset manifest: ") + e.what());
  }
  return m;
}

void write_dataset(const std::filesystem::path& manifest_path, const ExperimentData& data,
                   DatasetManifest manifest) {
  data.validate();
  const auto dir = manifest_path.parent_path();
  manifest.n = data.n();
  manifest.m = data.m();
  manifest.T = data.T();
  write_matrix_csv(dir / manifest.U0, data.U0);
  write_matrix_csv(dir / manifest.X0, data.X0);
  write_matrix_csv(dir / manifest.X1, data.X1);
  if (data.D0) {
    if (!manifest.D0) manifest.D0 = "D0.csv";
    write_matrix_csv(dir / *manifest.D0, *data.D0);
  } else {
    manifest.D0.reset();
  }
  write_json(manifest_path, manifest.to_json());
}

ExperimentData read_dataset(const std::filesystem::path& manifest_path) {
  const DatasetManifest man = DatasetManifest::from_json(read_json(manifest_path));
  const auto dir = manifest_path.parent_path();
  ExperimentData data{read_matrix_csv(resolve_path(dir, man.U0)),
                      read_matrix_csv(resolve_path(dir, man.X0)),
                      read_matrix_csv(resolve_path(dir, man.X1)), std::nullopt};
  data.validate();
  if (data.n() != man.n || data.m() != man.m || data.T() != man.T) {
    throw ParseError(fmt::format(
        "{}: manifest says n={}, m={}, T={} but the matrices give n={}, m={}, T={}",
        manifest_path.string(), man.n, man.m, man.T, data.n(), data.m(), data.T()));
  }
  return data;
}

}  // namespace ddinv

#include "ddinv/verify.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

#include <fmt/format.h>

#include "ddinv/kernels.hpp"

namespace ddinv {

namespace {

Matrix vertices_matrix(const HPolyhedron& P) { return enumerate_vertices(P).as_matrix(); }

}  // namespace

ContainmentProblem invariance_problem(const Matrix& F, const HPolyhedron& S,
                                      const DisturbanceSet& dist) {
  const Eigen::Index n = S.ambient_dim(), ns = S.num_constraints(), nd = dist.n_d();
  if (F.rows() != n || F.cols() != n || dist.n() != n) {
    throw std::invalid_argument("invariance_problem: dimension mismatch");
  }
  ContainmentProblem prob;
  prob.A = Matrix::Zero(ns + nd, 2 * n);
  prob.A.topLeftCorner(ns, n) = S.A();
  prob.A.bottomRightCorner(nd, n) = dist.D;
  prob.c.resize(ns + nd);
  prob.c << S.b(), Vector::Constant(nd, dist.delta);
  prob.B.resize(ns, 2 * n);
  prob.B << S.A() * F, S.A();
  prob.d = S.b();
  return prob;
}

InvarianceResult check_invariance_exact(const Matrix& A, const Matrix& B, const Matrix& K,
                                        const HPolyhedron& S, const DisturbanceSet& dist,
                                        const LpOptions& lp_options, double tol) {
  if (B.cols() != K.rows() || K.cols() != A.cols()) {
    throw std::invalid_argument("check_invariance_exact: K has the wrong shape");
  }
  const ContainmentResult r = solve_containment(invariance_problem(A + B * K, S, dist), lp_options, tol);
  InvarianceResult out;
  switch (r.status) {
    case ContainmentStatus::kContained:
      out.invariant = true;
      out.certificate = r.certificate;
      out.report = r.report;
      return out;
    case ContainmentStatus::kNotContained:
      return out;
    default:
      throw SolverError("check_invariance_exact: " +
                        (r.report ? r.report->summary() : r.lp.message));
  }
}

WorstCase worst_vertex_pair(const Matrix& F, const HPolyhedron& S, const DisturbanceSet& dist) {
  const Matrix X = vertices_matrix(S);
  const Matrix Dv = vertices_matrix(dist.polyhedron());
  WorstCase w;
  w.violation = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const Vector fx = F * X.col(j);
    for (Eigen::Index k = 0; k < Dv.cols(); ++k) {
      const double v = (S.A() * (fx + Dv.col(k)) - S.b()).maxCoeff();
      if (v > w.violation) {
        w.violation = v;
        w.state_vertex = X.col(j);
        w.disturbance_vertex = Dv.col(k);
      }
    }
  }
  return w;
}

Json ModelCheckReport::to_json() const {
  Json j{{"mode", mode}, {"checked", checked}, {"violations", violations}, {"passed", passed()}};
  j["seed"] = seed ? Json(*seed) : Json(nullptr);
  if (worst_model) j["worst_model"] = matrix_to_json(*worst_model);
  if (worst) {
    j["worst_violation"] = worst->violation;
    j["worst_state_vertex"] =
        std::vector<double>(worst->state_vertex.data(), worst->state_vertex.data() + worst->state_vertex.size());
    j["worst_disturbance_vertex"] = std::vector<double>(
        worst->disturbance_vertex.data(), worst->disturbance_vertex.data() + worst->disturbance_vertex.size());
  }
  return j;
}

namespace {

ModelCheckReport check_models(const Matrix& K, const std::vector<Vector>& models, Eigen::Index n,
                              Eigen::Index m, const HPolyhedron& S, const DisturbanceSet& dist,
                              const LpOptions& lp_options, std::string mode) {
  ModelCheckReport rep;
  rep.mode = std::move(mode);
  rep.checked = models.size();
  std::vector<char> ok(models.size(), 1);
  std::vector<std::string> errors(models.size());
  const auto count = static_cast<std::int64_t>(models.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t j = 0; j < count; ++j) {
    const Matrix V = unvec(models[static_cast<std::size_t>(j)], n, n + m);
    try {
      ok[static_cast<std::size_t>(j)] =
          check_invariance_exact(V.leftCols(n), V.rightCols(m), K, S, dist, lp_options).invariant;
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(j)] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw SolverError(e);
  }
  for (std::size_t j = 0; j < models.size(); ++j) {
    if (ok[j]) continue;
    ++rep.violations;
    const Matrix V = unvec(models[j], n, n + m);
    const Matrix F = V.leftCols(n) + V.rightCols(m) * K;
    try {
      WorstCase w = worst_vertex_pair(F, S, dist);
      if (!rep.worst || w.violation > rep.worst->violation) {
        rep.worst = std::move(w);
        rep.worst_model = V;
      }
    } catch (const std::invalid_argument&) {
      if (!rep.worst_model) rep.worst_model = V;
    }
  }
  return rep;
}

}  // namespace

ModelCheckReport check_invariance_consistent_models(const Matrix& K, const VPolytope& vt_vertices,
                                                    Eigen::Index n, Eigen::Index m,
                                                    const HPolyhedron& S, const DisturbanceSet& dist,
                                                    const LpOptions& lp_options) {
  if (vt_vertices.dim() != n * (n + m)) {
    throw std::invalid_argument("check_invariance_consistent_models: vertex dimension mismatch");
  }
  return check_models(K, vt_vertices.vertices(), n, m, S, dist, lp_options, "vertices");
}

ModelCheckReport check_invariance_consistent_models_vertices(const Matrix& K,
                                                             const ConsistencySet& vt,
                                                             const HPolyhedron& S,
                                                             const DisturbanceSet& dist,
                                                             const LpOptions& lp_options) {
  // enumerate_vertices rejects unbounded V_T.
  const VPolytope verts = enumerate_vertices(vt.H);
  return check_invariance_consistent_models(K, verts, vt.n, vt.m, S, dist, lp_options);
}

ModelCheckReport check_invariance_consistent_models_samples(
    const Matrix& K, const ConsistencySet& vt, const HPolyhedron& S, const DisturbanceSet& dist,
    std::size_t count, std::uint64_t seed, const LpOptions& lp_options) {
  Rng rng(seed);
  const std::vector<Vector> samples = hit_and_run(vt.H, count, rng, {}, lp_options);
  ModelCheckReport rep = check_models(K, samples, vt.n, vt.m, S, dist, lp_options, "samples");
  rep.seed = seed;
  return rep;
}

void Trajectory::write_csv(const std::filesystem::path& path) const {
  ensure_parent_dir(path);
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("{}: cannot open for writing", path.string()));
  const Eigen::Index n = states.empty() ? 0 : states.front().size();
  out << "step";
  for (Eigen::Index i = 0; i < n; ++i) out << ",x" << i + 1;
  for (Eigen::Index i = 0; i < n; ++i) out << ",d" << i + 1;
  out << ",contained\n";
  for (std::size_t k = 0; k < states.size(); ++k) {
    out << k;
    for (Eigen::Index i = 0; i < n; ++i) out << fmt::format(",{:.17g}", states[k](i));
    for (Eigen::Index i = 0; i < n; ++i) {
      // The last state has no outgoing disturbance.
      if (k < disturbances.size()) {
        out << fmt::format(",{:.17g}", disturbances[k](i));
      } else {
        out << ",";
      }
    }
    out << "," << (contained[k] ? 1 : 0) << "\n";
  }
}

Trajectory replay(const Matrix& F, const Vector& x0, const std::vector<Vector>& disturbances,
                  const HPolyhedron& S, double tol) {
  Trajectory tr;
  tr.F = F;
  tr.disturbances = disturbances;
  tr.states.reserve(disturbances.size() + 1);
  tr.states.push_back(x0);
  for (const Vector& d : disturbances) tr.states.push_back(F * tr.states.back() + d);
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    const bool in = contains(S, tr.states[k], tol);
    tr.contained.push_back(in);
    if (!in && !tr.first_exit_step) tr.first_exit_step = static_cast<Eigen::Index>(k);
  }
  return tr;
}

Trajectory simulate_closed_loop(const Matrix& A, const Matrix& B, const Matrix& K, const Vector& x0,
                                const DisturbanceSet& dist, Eigen::Index steps,
                                const DisturbancePolicy& policy, const HPolyhedron& S, double tol) {
  const Matrix F = A + B * K;
  const Eigen::Index n = F.rows();
  if (x0.size() != n || dist.n() != n || S.ambient_dim() != n) {
    throw std::invalid_argument("simulate_closed_loop: dimension mismatch");
  }
  std::vector<Vector> dv;
  if (policy.kind == DisturbancePolicy::Kind::kVertexRandom) {
    dv = enumerate_vertices(dist.polyhedron()).vertices();
  }
  if (policy.kind == DisturbancePolicy::Kind::kCustom && !policy.custom) {
    throw std::invalid_argument("simulate_closed_loop: custom policy without a callback");
  }
  Rng rng(policy.seed);
  std::vector<Vector> disturbances;
  disturbances.reserve(static_cast<std::size_t>(steps));
  Vector x = x0;
  for (Eigen::Index k = 0; k < steps; ++k) {
    Vector d;
    switch (policy.kind) {
      case DisturbancePolicy::Kind::kVertexRandom: d = dv[rng.index(dv.size())]; break;
      case DisturbancePolicy::Kind::kZero: d = Vector::Zero(n); break;
      case DisturbancePolicy::Kind::kCustom: d = policy.custom(k, x); break;
    }
    if (d.size() != n) throw std::invalid_argument("simulate_closed_loop: disturbance has wrong size");
    x = F * x + d;
    disturbances.push_back(std::move(d));
  }
  Trajectory tr = replay(F, x0, disturbances, S, tol);
  if (!contains(S, x0, tol)) tr.warning = "initial state lies outside S";
  return tr;
}

bool brute_force_invariance_oracle(const Matrix& F, const HPolyhedron& S,
                                   const DisturbanceSet& dist, double tol) {
  const Eigen::Index n = S.ambient_dim();
  if (n > 3) throw std::invalid_argument("brute_force_invariance_oracle: needs n <= 3");
  if (F.rows() != n || F.cols() != n || dist.n() != n) {
    throw std::invalid_argument("brute_force_invariance_oracle: dimension mismatch");
  }
  const Matrix X = vertices_matrix(S);
  const Matrix Dv = vertices_matrix(dist.polyhedron());
  const double scaled = tol * std::max(1.0, S.b().cwiseAbs().maxCoeff());
  return kernels::parallel::max_image_violation(S.A(), S.b(), F, X, Dv) <= scaled;
}

}  // namespace ddinv

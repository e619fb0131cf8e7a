#include "ddinv/synthesis.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace ddinv {

namespace {

Matrix blkdiag(const Matrix& P, const Matrix& Q);

}  // namespace

ContainmentProblem model_containment_problem(const Matrix& A, const Matrix& B, const Matrix& K,
                                 const HPolyhedron& S, const DisturbanceSet& dist) {
  ContainmentProblem prob;
  prob.A = blkdiag(S.A(), dist.D);
  prob.c.resize(S.num_constraints() + dist.n_d());
  prob.c << S.b(), Vector::Constant(dist.n_d(), dist.delta);
  prob.B.resize(S.num_constraints(), 2 * S.ambient_dim());
  prob.B << S.A() * (A + B * K), S.A();
  prob.d = S.b();
  return prob;
}

ContainmentProblem thm1_vertex_problem(const Vector& x, const Matrix& K, const HPolyhedron& S,
                                        const DisturbanceSet& dist, const HPolyhedron& vt) {
  const Eigen::Index n = x.size();
  Vector z(n + K.rows());
  z << x, K * x;
  ContainmentProblem prob;
  prob.A = blkdiag(dist.D, vt.A());
  prob.c.resize(dist.n_d() + vt.num_constraints());
  prob.c << Vector::Constant(dist.n_d(), dist.delta), vt.b();
  prob.B.resize(S.num_constraints(), n + n * z.size());
  prob.B << S.A(), kron(z.transpose(), S.A());
  prob.d = S.b();
  return prob;
}

ContainmentProblem input_containment_problem(const Matrix& K, const HPolyhedron& U, const HPolyhedron& S) {
  return {S.A(), S.b(), U.A() * K, U.b()};
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Rows of one LP block. Variable indices are global, row indices local.
struct Fragment {
  std::vector<Triplet> eq;
  std::vector<double> eq_rhs;
  std::vector<Triplet> ineq;
  std::vector<double> ineq_rhs;

  Eigen::Index new_eq(double rhs) {
    eq_rhs.push_back(rhs);
    return static_cast<Eigen::Index>(eq_rhs.size()) - 1;
  }
  Eigen::Index new_ineq(double rhs) {
    ineq_rhs.push_back(rhs);
    return static_cast<Eigen::Index>(ineq_rhs.size()) - 1;
  }
  static void put(std::vector<Triplet>& t, Eigen::Index row, Eigen::Index col, double v) {
    if (v != 0.0) t.emplace_back(row, col, v);
  }
};

/// Shared variable layout: vec(K) (column-major, K(r, c) at c*m + r), then
/// the margin variable t when enabled, then the multiplier blocks.
struct Layout {
  Eigen::Index n = 0, m = 0;
  Eigen::Index k_off = 0;
  std::optional<Eigen::Index> t_off;
  Eigen::Index next = 0;

  Layout(Eigen::Index n_, Eigen::Index m_, bool margin) : n(n_), m(m_) {
    next = m * n;
    if (margin) t_off = next++;
  }
  Eigen::Index k_var(Eigen::Index r, Eigen::Index c) const { return k_off + c * m + r; }
  Eigen::Index allocate(Eigen::Index count) {
    const Eigen::Index off = next;
    next += count;
    return off;
  }
};

/// E (n_s x (n_s + n_d)) certifying (A + B K) S + D_delta in S.
void model_block(Fragment& f, const Layout& L, Eigen::Index e_off, const Matrix& A, const Matrix& B,
                 const HPolyhedron& S, const DisturbanceSet& dist) {
  const Matrix& SA = S.A();
  const Eigen::Index ns = SA.rows(), nd = dist.n_d(), n = L.n, m = L.m;
  const Eigen::Index p = ns + nd;
  const Matrix SAA = SA * A;
  const Matrix SAB = SA * B;
  for (Eigen::Index i = 0; i < ns; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const Eigen::Index r = f.new_eq(SAA(i, j));
      for (Eigen::Index k = 0; k < ns; ++k) Fragment::put(f.eq, r, e_off + i * p + k, SA(k, j));
      for (Eigen::Index q = 0; q < m; ++q) Fragment::put(f.eq, r, L.k_var(q, j), -SAB(i, q));
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      const Eigen::Index r = f.new_eq(SA(i, j));
      for (Eigen::Index k = 0; k < nd; ++k) {
        Fragment::put(f.eq, r, e_off + i * p + ns + k, dist.D(k, j));
      }
    }
    const Eigen::Index r = f.new_ineq(S.b()(i));
    for (Eigen::Index k = 0; k < ns; ++k) Fragment::put(f.ineq, r, e_off + i * p + k, S.b()(k));
    for (Eigen::Index k = 0; k < nd; ++k) {
      Fragment::put(f.ineq, r, e_off + i * p + ns + k, dist.delta);
    }
    if (L.t_off) Fragment::put(f.ineq, r, *L.t_off, S.b()(i));
  }
}

/// Nonzeros of G by column.
using ColumnLists = std::vector<std::vector<std::pair<Eigen::Index, double>>>;

ColumnLists column_lists(const Matrix& G) {
  ColumnLists cols(static_cast<std::size_t>(G.cols()));
  for (Eigen::Index c = 0; c < G.cols(); ++c) {
    for (Eigen::Index k = 0; k < G.rows(); ++k) {
      if (G(k, c) != 0.0) cols[static_cast<std::size_t>(c)].emplace_back(k, G(k, c));
    }
  }
  return cols;
}

/// E^j (n_s x (n_d + R)) for state vertex x.
void state_vertex_block(Fragment& f, const Layout& L, Eigen::Index e_off, const Vector& x,
                        const HPolyhedron& S, const DisturbanceSet& dist, const ColumnLists& Gcols,
                        const Vector& h) {
  const Matrix& SA = S.A();
  const Eigen::Index ns = SA.rows(), nd = dist.n_d(), n = L.n, m = L.m;
  const Eigen::Index R = h.size();
  const Eigen::Index p = nd + R;
  for (Eigen::Index i = 0; i < ns; ++i) {
    const Eigen::Index row0 = e_off + i * p;
    for (Eigen::Index l = 0; l < n; ++l) {
      const Eigen::Index r = f.new_eq(SA(i, l));
      for (Eigen::Index k = 0; k < nd; ++k) Fragment::put(f.eq, r, row0 + k, dist.D(k, l));
    }
    // Column c*n + l of (z' kron S) is z(c) S(:, l), z = [x; K x].
    for (Eigen::Index c = 0; c < n + m; ++c) {
      for (Eigen::Index l = 0; l < n; ++l) {
        const Eigen::Index r = f.new_eq(c < n ? x(c) * SA(i, l) : 0.0);
        for (const auto& [k, g] : Gcols[static_cast<std::size_t>(c * n + l)]) {
          f.eq.emplace_back(r, row0 + nd + k, g);
        }
        if (c >= n) {
          for (Eigen::Index q = 0; q < n; ++q) {
            Fragment::put(f.eq, r, L.k_var(c - n, q), -SA(i, l) * x(q));
          }
        }
      }
    }
    const Eigen::Index r = f.new_ineq(S.b()(i));
    for (Eigen::Index k = 0; k < nd; ++k) Fragment::put(f.ineq, r, row0 + k, dist.delta);
    for (Eigen::Index k = 0; k < R; ++k) Fragment::put(f.ineq, r, row0 + nd + k, h(k));
    if (L.t_off) Fragment::put(f.ineq, r, *L.t_off, S.b()(i));
  }
}

/// E_u (n_u x n_s): U K = E_u S, E_u b <= g.
void input_block(Fragment& f, const Layout& L, Eigen::Index e_off, const HPolyhedron& U,
                 const HPolyhedron& S) {
  const Eigen::Index nu = U.num_constraints(), ns = S.num_constraints(), n = L.n, m = L.m;
  for (Eigen::Index i = 0; i < nu; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const Eigen::Index r = f.new_eq(0.0);
      for (Eigen::Index k = 0; k < ns; ++k) Fragment::put(f.eq, r, e_off + i * ns + k, S.A()(k, j));
      for (Eigen::Index q = 0; q < m; ++q) Fragment::put(f.eq, r, L.k_var(q, j), -U.A()(i, q));
    }
    const Eigen::Index r = f.new_ineq(U.b()(i));
    for (Eigen::Index k = 0; k < ns; ++k) Fragment::put(f.ineq, r, e_off + i * ns + k, S.b()(k));
  }
}

LinearProgram assemble(const Layout& L, const std::vector<Fragment>& frags,
                       const std::vector<std::pair<Eigen::Index, Eigen::Index>>& nonneg_ranges) {
  LinearProgram lp(L.next);
  for (const auto& [off, count] : nonneg_ranges) {
    for (Eigen::Index k = off; k < off + count; ++k) {
      lp.domains[static_cast<std::size_t>(k)] = VarDomain::kNonnegative;
    }
  }
  std::size_t n_eq = 0, n_ineq = 0, nnz_eq = 0, nnz_ineq = 0;
  for (const auto& f : frags) {
    n_eq += f.eq_rhs.size();
    n_ineq += f.ineq_rhs.size();
    nnz_eq += f.eq.size();
    nnz_ineq += f.ineq.size();
  }
  std::vector<Triplet> eq, ineq;
  eq.reserve(nnz_eq);
  ineq.reserve(nnz_ineq);
  lp.eq_rhs.resize(static_cast<Eigen::Index>(n_eq));
  lp.ineq_rhs.resize(static_cast<Eigen::Index>(n_ineq));
  Eigen::Index eq_base = 0, ineq_base = 0;
  for (const auto& f : frags) {
    for (const auto& t : f.eq) eq.emplace_back(eq_base + t.row(), t.col(), t.value());
    for (const auto& t : f.ineq) ineq.emplace_back(ineq_base + t.row(), t.col(), t.value());
    for (std::size_t k = 0; k < f.eq_rhs.size(); ++k) lp.eq_rhs(eq_base + static_cast<Eigen::Index>(k)) = f.eq_rhs[k];
    for (std::size_t k = 0; k < f.ineq_rhs.size(); ++k) lp.ineq_rhs(ineq_base + static_cast<Eigen::Index>(k)) = f.ineq_rhs[k];
    eq_base += static_cast<Eigen::Index>(f.eq_rhs.size());
    ineq_base += static_cast<Eigen::Index>(f.ineq_rhs.size());
  }
  if (L.t_off) {
    // t <= 1
    ineq.emplace_back(ineq_base, *L.t_off, 1.0);
    lp.ineq_rhs.conservativeResize(ineq_base + 1);
    lp.ineq_rhs(ineq_base) = 1.0;
    ++ineq_base;
    lp.domains[static_cast<std::size_t>(*L.t_off)] = VarDomain::kNonnegative;
    lp.objective = Vector::Zero(L.next);
    lp.objective(*L.t_off) = -1.0;
  }
  lp.eq_matrix = sparse_from_triplets(eq_base, L.next, eq);
  lp.ineq_matrix = sparse_from_triplets(ineq_base, L.next, ineq);
  return lp;
}

void check_budget(const Layout& L, std::size_t cap, const std::string& breakdown) {
  if (static_cast<std::size_t>(L.next) > cap) {
    throw ProblemTooLarge(fmt::format(
        "LP would have {} variables, above the budget of {} ({}); enable the minimal V_T "
        "representation, reduce T or raise max_variables",
        L.next, cap, breakdown));
  }
}

Matrix block_of(const Vector& x, Eigen::Index off, Eigen::Index rows, Eigen::Index cols) {
  // Row-major storage of a rows x cols block.
  return unvec(x.segment(off, rows * cols), cols, rows).transpose();
}

Matrix blkdiag(const Matrix& P, const Matrix& Q) {
  Matrix M = Matrix::Zero(P.rows() + Q.rows(), P.cols() + Q.cols());
  M.topLeftCorner(P.rows(), P.cols()) = P;
  M.bottomRightCorner(Q.rows(), Q.cols()) = Q;
  return M;
}

void require_nonempty(const HPolyhedron& P, const LpOptions& lp, const char* what) {
  if (!check_nonempty(P, lp).nonempty) {
    throw std::invalid_argument(fmt::format("{} is empty", what));
  }
}

void check_common(Eigen::Index n, Eigen::Index m, const HPolyhedron& S, const DisturbanceSet& dist,
                  const std::optional<HPolyhedron>& input_set, const SynthesisOptions& options) {
  if (S.ambient_dim() != n) {
    throw std::invalid_argument(
        fmt::format("S lives in R^{} but the state has dimension {}", S.ambient_dim(), n));
  }
  if (dist.n() != n) {
    throw std::invalid_argument(
        fmt::format("D lives in R^{} but the state has dimension {}", dist.n(), n));
  }
  if (dist.delta < 0.0) throw std::invalid_argument("delta must be nonnegative");
  if (input_set && input_set->ambient_dim() != m) {
    throw std::invalid_argument(fmt::format("input set lives in R^{} but there are {} inputs",
                                            input_set->ambient_dim(), m));
  }
  require_nonempty(S, options.lp, "S");
  require_nonempty(dist.polyhedron(), options.lp, "the disturbance set");
}

/// Solves, extracts K and multipliers, re-verifies. `blocks` gives each
/// certificate's template (problem filled in after K is known).
struct PendingBlock {
  std::string kind;
  Eigen::Index index;
  Vector point;
  Eigen::Index e_off;
  Eigen::Index rows;
  Eigen::Index cols;
  std::function<ContainmentProblem(const Matrix&)> problem;
};

void solve_and_extract(SynthesisResult& res, const LinearProgram& lp, const Layout& L,
                       std::vector<PendingBlock>& blocks, const SynthesisOptions& options) {
  res.diagnostics.num_vars = lp.num_vars;
  res.diagnostics.num_eq = lp.num_eq();
  res.diagnostics.num_ineq = lp.num_ineq();
  res.diagnostics.num_nonzeros = lp.eq_matrix.nonZeros() + lp.ineq_matrix.nonZeros();
  const auto t0 = Clock::now();
  const LpSolution sol = solve(lp, options.lp);
  res.diagnostics.solve_seconds = seconds_since(t0);
  res.diagnostics.lp_status = to_string(sol.status);
  res.diagnostics.message = sol.message;
  if (sol.status == LpStatus::kInfeasible) {
    res.status = SynthesisStatus::kInfeasible;
    return;
  }
  if (sol.status != LpStatus::kOptimal) {
    res.status = SynthesisStatus::kSolverFailure;
    return;
  }
  const auto t1 = Clock::now();
  const Matrix K = unvec(sol.x.segment(L.k_off, L.m * L.n), L.m, L.n);
  res.K = K;
  if (L.t_off) res.margin = sol.x(*L.t_off);
  res.certificates_passed = true;
  res.certificates.resize(blocks.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const PendingBlock& blk = blocks[b];
    VertexCertificate& vc = res.certificates[b];
    vc.kind = blk.kind;
    vc.index = blk.index;
    vc.point = blk.point;
    vc.problem = blk.problem(K);
    vc.certificate = {block_of(sol.x, blk.e_off, blk.rows, blk.cols)};
    vc.report = verify_certificate(vc.problem, vc.certificate, options.certificate_tol);
  }
  for (const auto& vc : res.certificates) res.certificates_passed &= vc.report.passed;
  res.diagnostics.verify_seconds = seconds_since(t1);
  if (res.certificates_passed) {
    res.status = SynthesisStatus::kFeasible;
  } else {
    res.status = SynthesisStatus::kSolverFailure;
    res.diagnostics.message = "LP reported optimal but certificate re-verification failed";
  }
}

void add_input_block(const std::optional<HPolyhedron>& input_set, const HPolyhedron& S, Layout& L,
                     std::vector<Fragment>& frags,
                     std::vector<std::pair<Eigen::Index, Eigen::Index>>& nonneg,
                     std::vector<PendingBlock>& blocks) {
  if (!input_set) return;
  const Eigen::Index nu = input_set->num_constraints(), ns = S.num_constraints();
  const Eigen::Index off = L.allocate(nu * ns);
  nonneg.emplace_back(off, nu * ns);
  Fragment f;
  input_block(f, L, off, *input_set, S);
  frags.push_back(std::move(f));
  blocks.push_back({"input", 0, Vector(), off, nu, ns, [U = *input_set, S](const Matrix& K) {
                      return input_containment_problem(K, U, S);
                    }});
}

/// Shared by the model-based and vertex-based formulations.
SynthesisResult synthesize_models(Formulation formulation, const std::vector<Matrix>& As,
                                  const std::vector<Matrix>& Bs, const std::vector<Vector>& points,
                                  const HPolyhedron& S, const DisturbanceSet& dist,
                                  const std::optional<HPolyhedron>& input_set,
                                  const SynthesisOptions& options) {
  const auto t0 = Clock::now();
  const Eigen::Index n = As.front().rows(), m = Bs.front().cols();
  check_common(n, m, S, dist, input_set, options);
  SynthesisResult res;
  res.formulation = formulation;
  res.delta = dist.delta;
  res.diagnostics.num_vertices = static_cast<Eigen::Index>(As.size());

  Layout L(n, m, options.margin);
  const Eigen::Index ns = S.num_constraints(), p = ns + dist.n_d();
  const auto count = static_cast<Eigen::Index>(As.size());
  {
    Layout probe = L;
    probe.next += count * ns * p;
    check_budget(probe, options.max_variables,
                 fmt::format("{} blocks of {}x{} multipliers", count, ns, p));
  }
  const Eigen::Index first = L.allocate(count * ns * p);
  std::vector<std::pair<Eigen::Index, Eigen::Index>> nonneg{{first, count * ns * p}};
  std::vector<Fragment> frags(static_cast<std::size_t>(count));
  std::vector<PendingBlock> blocks;
#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index j = 0; j < count; ++j) {
    model_block(frags[static_cast<std::size_t>(j)], L, first + j * ns * p,
                As[static_cast<std::size_t>(j)], Bs[static_cast<std::size_t>(j)], S, dist);
  }
  for (Eigen::Index j = 0; j < count; ++j) {
    const Matrix& Aj = As[static_cast<std::size_t>(j)];
    const Matrix& Bj = Bs[static_cast<std::size_t>(j)];
    blocks.push_back({formulation == Formulation::kModelBased ? "model" : "model_vertex", j,
                      points[static_cast<std::size_t>(j)], first + j * ns * p, ns, p,
                      [Aj, Bj, S, dist](const Matrix& K) {
                        return model_containment_problem(Aj, Bj, K, S, dist);
                      }});
  }
  add_input_block(input_set, S, L, frags, nonneg, blocks);
  const LinearProgram lp = assemble(L, frags, nonneg);
  res.diagnostics.build_seconds = seconds_since(t0);
  solve_and_extract(res, lp, L, blocks, options);
  return res;
}

}  // namespace

const char* to_string(Formulation f) {
  switch (f) {
    case Formulation::kModelBased: return "model";
    case Formulation::kThm1: return "thm1";
    case Formulation::kThm2: return "thm2";
  }
  return "unknown";
}

Formulation parse_formulation(const std::string& s) {
  if (s == "model") return Formulation::kModelBased;
  if (s == "thm1") return Formulation::kThm1;
  if (s == "thm2") return Formulation::kThm2;
  throw std::invalid_argument(fmt::format("unknown formulation '{}' (expected model, thm1 or thm2)", s));
}

const char* to_string(SynthesisStatus s) {
  switch (s) {
    case SynthesisStatus::kFeasible: return "feasible";
    case SynthesisStatus::kInfeasible: return "infeasible";
    case SynthesisStatus::kSolverFailure: return "solver_failure";
  }
  return "unknown";
}

const char* to_string(Representation r) {
  switch (r) {
    case Representation::kAuto: return "auto";
    case Representation::kFull: return "full";
    case Representation::kMinimal: return "minimal";
  }
  return "unknown";
}

Representation parse_representation(const std::string& s) {
  if (s == "auto") return Representation::kAuto;
  if (s == "full") return Representation::kFull;
  if (s == "minimal") return Representation::kMinimal;
  throw std::invalid_argument(fmt::format("unknown representation '{}' (expected auto, full or minimal)", s));
}

SynthesisResult synthesize_model_based(const Matrix& A, const Matrix& B, const HPolyhedron& S,
                                       const DisturbanceSet& dist,
                                       const std::optional<HPolyhedron>& input_set,
                                       const SynthesisOptions& options) {
  if (A.rows() != A.cols() || B.rows() != A.rows()) {
    throw std::invalid_argument(fmt::format("synthesize_model_based: A is {}x{}, B is {}x{}",
                                            A.rows(), A.cols(), B.rows(), B.cols()));
  }
  Matrix AB(A.rows(), A.cols() + B.cols());
  AB << A, B;
  return synthesize_models(Formulation::kModelBased, {A}, {B}, {vec(AB)}, S, dist, input_set,
                           options);
}

SynthesisResult synthesize_thm2(const VPolytope& vt_vertices, Eigen::Index n, Eigen::Index m,
                                const HPolyhedron& S, const DisturbanceSet& dist,
                                const std::optional<HPolyhedron>& input_set,
                                const SynthesisOptions& options) {
  if (vt_vertices.size() == 0) throw std::invalid_argument("synthesize_thm2: no vertices");
  if (vt_vertices.dim() != n * (n + m)) {
    throw std::invalid_argument(fmt::format(
        "synthesize_thm2: vertices live in R^{}, expected n(n+m) = {}", vt_vertices.dim(), n * (n + m)));
  }
  std::vector<Matrix> As, Bs;
  for (const Vector& v : vt_vertices.vertices()) {
    const Matrix V = unvec(v, n, n + m);
    As.push_back(V.leftCols(n));
    Bs.push_back(V.rightCols(m));
  }
  return synthesize_models(Formulation::kThm2, As, Bs, vt_vertices.vertices(), S, dist, input_set,
                           options);
}

SynthesisResult synthesize_thm1(const ExperimentData& data, const HPolyhedron& S,
                                const DisturbanceSet& dist,
                                const std::optional<HPolyhedron>& input_set,
                                const SynthesisOptions& options) {
  data.validate();
  const auto t0 = Clock::now();
  const HPolyhedron full = stacked_consistency_rows(data, dist);
  bool minimize = options.representation == Representation::kMinimal;
  std::string note;
  if (options.representation == Representation::kAuto && data.T() > options.auto_minimize_above) {
    const NonemptyResult ne = check_nonempty(full, options.lp);
    if (ne.nonempty && chebyshev_ball(full, 1e6, options.lp).radius > 1e-10) {
      minimize = true;
    } else {
      note = "V_T is empty or flat; kept the full representation";
    }
  }
  const ConsistencySet vt = build_consistency_set(data, dist, minimize, options.redundancy);
  const double minimize_seconds = seconds_since(t0);
  SynthesisResult res = synthesize_thm1(vt, S, dist, input_set, options);
  res.diagnostics.vt_rows_full = full.num_constraints();
  res.diagnostics.minimize_seconds = minimize_seconds;
  if (!note.empty() && res.diagnostics.message.empty()) res.diagnostics.message = note;
  return res;
}

SynthesisResult synthesize_thm1(const ConsistencySet& vt, const HPolyhedron& S,
                                const DisturbanceSet& dist,
                                const std::optional<HPolyhedron>& input_set,
                                const SynthesisOptions& options) {
  const auto t0 = Clock::now();
  const Eigen::Index n = vt.n, m = vt.m;
  if (vt.H.ambient_dim() != n * (n + m)) {
    throw std::invalid_argument("synthesize_thm1: consistency set has the wrong dimension");
  }
  check_common(n, m, S, dist, input_set, options);
  if (!is_bounded_general(S, options.lp)) {
    throw std::invalid_argument(
        "synthesize_thm1: S must be bounded (its recession cone {z : S z <= 0} is nontrivial)");
  }
  VertexEnumerationOptions vopt = options.vertices;
  vopt.assume_bounded = true;
  const VPolytope verts = enumerate_vertices(S, vopt);

  SynthesisResult res;
  res.formulation = Formulation::kThm1;
  res.delta = dist.delta;
  res.vt_row_map = vt.row_map;
  res.diagnostics.num_vertices = static_cast<Eigen::Index>(verts.size());
  res.diagnostics.vt_rows_full = vt.H.num_constraints();
  res.diagnostics.vt_rows_used = vt.H.num_constraints();

  Layout L(n, m, options.margin);
  const Eigen::Index ns = S.num_constraints(), R = vt.H.num_constraints();
  const Eigen::Index p = dist.n_d() + R;
  const auto count = static_cast<Eigen::Index>(verts.size());
  const Eigen::Index per_block = ns * p;
  {
    Layout probe = L;
    probe.next += count * per_block;
    check_budget(probe, options.max_variables,
                 fmt::format("{} vertices x {}x{} multipliers", count, ns, p));
  }
  const Eigen::Index first = L.allocate(count * per_block);
  std::vector<std::pair<Eigen::Index, Eigen::Index>> nonneg{{first, count * per_block}};
  const ColumnLists Gcols = column_lists(vt.H.A());
  std::vector<Fragment> frags(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index j = 0; j < count; ++j) {
    state_vertex_block(frags[static_cast<std::size_t>(j)], L, first + j * per_block,
                       verts.vertices()[static_cast<std::size_t>(j)], S, dist, Gcols, vt.H.b());
  }
  std::vector<PendingBlock> blocks;
  for (Eigen::Index j = 0; j < count; ++j) {
    const Vector& x = verts.vertices()[static_cast<std::size_t>(j)];
    blocks.push_back({"state_vertex", j, x, first + j * per_block, ns, p,
                      [x, &S, &dist, &vt](const Matrix& K) {
                        return thm1_vertex_problem(x, K, S, dist, vt.H);
                      }});
  }
  add_input_block(input_set, S, L, frags, nonneg, blocks);
  const LinearProgram lp = assemble(L, frags, nonneg);
  frags.clear();
  res.diagnostics.build_seconds = seconds_since(t0);
  solve_and_extract(res, lp, L, blocks, options);
  return res;
}

bool reverify(const SynthesisResult& result, double tol) {
  if (!result.K) return false;
  for (const auto& vc : result.certificates) {
    if (!verify_certificate(vc.problem, vc.certificate, tol).passed) return false;
  }
  return !result.certificates.empty();
}

BisectionResult max_delta_bisection(const std::function<SynthesisResult(double)>& problem,
                                    double lo, double hi, double abs_tol) {
  if (lo > hi) throw std::invalid_argument("max_delta_bisection: lo > hi");
  if (abs_tol <= 0.0) throw std::invalid_argument("max_delta_bisection: tolerance must be positive");
  BisectionResult out;
  auto probe = [&](double delta) {
    SynthesisResult r = problem(delta);
    out.probes.push_back({delta, r.status});
    return r;
  };
  SynthesisResult at_lo = probe(lo);
  if (!at_lo.feasible()) return out;
  out.feasible_at_lo = true;
  out.delta_star = lo;
  out.at_star = std::move(at_lo);
  if (hi == lo) return out;
  SynthesisResult at_hi = probe(hi);
  if (at_hi.feasible()) {
    out.delta_star = hi;
    out.at_star = std::move(at_hi);
    return out;
  }
  while (hi - lo > abs_tol) {
    const double mid = 0.5 * (lo + hi);
    SynthesisResult r = probe(mid);
    if (r.feasible()) {
      lo = mid;
      out.delta_star = mid;
      out.at_star = std::move(r);
    } else {
      hi = mid;
    }
  }
  return out;
}

Json SynthesisResult::to_json() const {
  Json j;
  j["status"] = to_string(status);
  j["formulation"] = to_string(formulation);
  j["delta"] = delta;
  j["K"] = K ? matrix_to_json(*K) : Json(nullptr);
  j["margin"] = margin ? Json(*margin) : Json(nullptr);
  j["certificates_passed"] = certificates_passed;
  Json certs = Json::array();
  for (const auto& vc : certificates) {
    Json c{{"kind", vc.kind}, {"index", vc.index}, {"rows", vc.certificate.E.rows()},
           {"cols", vc.certificate.E.cols()}};
    c["point"] = std::vector<double>(vc.point.data(), vc.point.data() + vc.point.size());
    c["report"] = vc.report.to_json();
    certs.push_back(std::move(c));
  }
  j["certificates"] = std::move(certs);
  const auto& d = diagnostics;
  j["diagnostics"] = Json{{"num_vars", d.num_vars},
                          {"num_eq", d.num_eq},
                          {"num_ineq", d.num_ineq},
                          {"num_nonzeros", d.num_nonzeros},
                          {"num_vertices", d.num_vertices},
                          {"vt_rows_full", d.vt_rows_full},
                          {"vt_rows_used", d.vt_rows_used},
                          {"minimize_seconds", d.minimize_seconds},
                          {"build_seconds", d.build_seconds},
                          {"solve_seconds", d.solve_seconds},
                          {"verify_seconds", d.verify_seconds},
                          {"lp_status", d.lp_status},
                          {"message", d.message}};
  return j;
}

void write_synthesis_result(const std::filesystem::path& dir, const SynthesisResult& result,
                            const Json& config_echo) {
  std::filesystem::create_directories(dir);
  Json j = result.to_json();
  if (result.K) {
    write_matrix_csv(dir / "K.csv", *result.K);
    j["K_file"] = "K.csv";
  }
  for (std::size_t b = 0; b < result.certificates.size(); ++b) {
    const auto& vc = result.certificates[b];
    const auto stem = dir / "certificates" / fmt::format("{}_{}", vc.kind, vc.index);
    write_certificate(stem, vc.problem, vc.certificate, vc.report);
    j["certificates"][b]["file"] = fmt::format("certificates/{}_{}.csv", vc.kind, vc.index);
  }
  if (!result.vt_row_map.empty() && result.diagnostics.vt_rows_used < result.diagnostics.vt_rows_full) {
    Vector map(static_cast<Eigen::Index>(result.vt_row_map.size()));
    for (std::size_t k = 0; k < result.vt_row_map.size(); ++k) {
      map(static_cast<Eigen::Index>(k)) = static_cast<double>(result.vt_row_map[k]);
    }
    write_vector_csv(dir / "vt_row_map.csv", map);
    j["vt_row_map_file"] = "vt_row_map.csv";
  }
  j["config"] = config_echo;
  write_json(dir / "result.json", j);
}

}  // namespace ddinv

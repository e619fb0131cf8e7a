#include <Highs.h>

#include <chrono>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "ddinv/lp.hpp"

namespace ddinv {

LinearProgram::LinearProgram(Eigen::Index n)
    : num_vars(n),
      eq_matrix(0, n),
      eq_rhs(0),
      ineq_matrix(0, n),
      ineq_rhs(0),
      domains(static_cast<std::size_t>(n), VarDomain::kFree) {}

bool LinearProgram::has_objective() const {
  return objective.size() > 0 && objective.cwiseAbs().maxCoeff() > 0.0;
}

void LinearProgram::validate() const {
  if (num_vars < 0) throw std::invalid_argument("LinearProgram: negative variable count");
  if (eq_matrix.cols() != num_vars || ineq_matrix.cols() != num_vars) {
    throw std::invalid_argument(fmt::format(
        "LinearProgram: constraint matrices must have {} columns (eq {}, ineq {})", num_vars,
        eq_matrix.cols(), ineq_matrix.cols()));
  }
  if (eq_rhs.size() != eq_matrix.rows() || ineq_rhs.size() != ineq_matrix.rows()) {
    throw std::invalid_argument("LinearProgram: right-hand side length mismatch");
  }
  if (static_cast<Eigen::Index>(domains.size()) != num_vars) {
    throw std::invalid_argument("LinearProgram: one domain per variable required");
  }
  if (objective.size() != 0 && objective.size() != num_vars) {
    throw std::invalid_argument("LinearProgram: objective length mismatch");
  }
}

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
    case LpStatus::kSolverFailure: return "solver_failure";
  }
  return "unknown";
}

double max_violation(const LinearProgram& lp, const Vector& x) {
  double worst = 0.0;
  if (lp.num_eq() > 0) {
    worst = std::max(worst, (lp.eq_matrix * x - lp.eq_rhs).cwiseAbs().maxCoeff());
  }
  if (lp.num_ineq() > 0) {
    worst = std::max(worst, (lp.ineq_matrix * x - lp.ineq_rhs).maxCoeff());
  }
  for (Eigen::Index k = 0; k < lp.num_vars; ++k) {
    if (lp.domains[static_cast<std::size_t>(k)] == VarDomain::kNonnegative) {
      worst = std::max(worst, -x(k));
    }
  }
  return worst;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void configure(Highs& highs, const LpOptions& options) {
  highs.setOptionValue("output_flag", options.verbose);
  highs.setOptionValue("presolve", options.presolve ? "on" : "off");
  switch (options.method) {
    case LpMethod::kChoose: highs.setOptionValue("solver", "choose"); break;
    case LpMethod::kSimplex: highs.setOptionValue("solver", "simplex"); break;
    case LpMethod::kIpm: highs.setOptionValue("solver", "ipm"); break;
  }
  highs.setOptionValue("primal_feasibility_tolerance", options.primal_feasibility_tol);
  highs.setOptionValue("dual_feasibility_tolerance", options.dual_feasibility_tol);
  highs.setOptionValue("time_limit", options.time_limit_seconds);
}

// Per-row scale factors that bring each row to unit infinity norm.
Vector row_scales(const SparseMatrix& M, bool enabled) {
  Vector scales = Vector::Ones(M.rows());
  if (!enabled) return scales;
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    double mx = 0.0;
    for (SparseMatrix::InnerIterator it(M, r); it; ++it) mx = std::max(mx, std::abs(it.value()));
    if (mx > 0.0) scales(r) = 1.0 / mx;
  }
  return scales;
}

HighsLp to_highs(const LinearProgram& lp, const Vector& eq_scale, const Vector& ineq_scale) {
  HighsLp h;
  const auto n = static_cast<HighsInt>(lp.num_vars);
  const auto n_eq = static_cast<HighsInt>(lp.num_eq());
  const auto n_in = static_cast<HighsInt>(lp.num_ineq());
  h.num_col_ = n;
  h.num_row_ = n_eq + n_in;
  h.col_cost_.assign(static_cast<std::size_t>(n), 0.0);
  if (lp.objective.size() == lp.num_vars) {
    for (HighsInt k = 0; k < n; ++k) h.col_cost_[k] = lp.objective(k);
  }
  h.col_lower_.resize(static_cast<std::size_t>(n));
  h.col_upper_.assign(static_cast<std::size_t>(n), kInf);
  for (HighsInt k = 0; k < n; ++k) {
    h.col_lower_[k] = lp.domains[static_cast<std::size_t>(k)] == VarDomain::kNonnegative ? 0.0 : -kInf;
  }
  h.row_lower_.resize(static_cast<std::size_t>(h.num_row_));
  h.row_upper_.resize(static_cast<std::size_t>(h.num_row_));
  for (HighsInt r = 0; r < n_eq; ++r) {
    h.row_lower_[r] = h.row_upper_[r] = lp.eq_rhs(r) * eq_scale(r);
  }
  for (HighsInt r = 0; r < n_in; ++r) {
    h.row_lower_[n_eq + r] = -kInf;
    h.row_upper_[n_eq + r] = lp.ineq_rhs(r) * ineq_scale(r);
  }

  // Row-wise storage avoids a transpose of the (row-major) input.
  h.a_matrix_.format_ = MatrixFormat::kRowwise;
  h.a_matrix_.num_col_ = n;
  h.a_matrix_.num_row_ = h.num_row_;
  auto& start = h.a_matrix_.start_;
  auto& index = h.a_matrix_.index_;
  auto& value = h.a_matrix_.value_;
  start.clear();  // HighsSparseMatrix starts out holding {0}
  start.reserve(static_cast<std::size_t>(h.num_row_) + 1);
  index.reserve(static_cast<std::size_t>(lp.eq_matrix.nonZeros() + lp.ineq_matrix.nonZeros()));
  value.reserve(index.capacity());
  start.push_back(0);
  auto append = [&](const SparseMatrix& M, const Vector& scale) {
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
      for (SparseMatrix::InnerIterator it(M, r); it; ++it) {
        if (it.value() == 0.0) continue;
        index.push_back(static_cast<HighsInt>(it.col()));
        value.push_back(it.value() * scale(r));
      }
      start.push_back(static_cast<HighsInt>(index.size()));
    }
  };
  append(lp.eq_matrix, eq_scale);
  append(lp.ineq_matrix, ineq_scale);
  h.sense_ = ObjSense::kMinimize;
  return h;
}

LpStatus map_status(HighsModelStatus s) {
  switch (s) {
    case HighsModelStatus::kOptimal: return LpStatus::kOptimal;
    case HighsModelStatus::kInfeasible: return LpStatus::kInfeasible;
    case HighsModelStatus::kUnbounded: return LpStatus::kUnbounded;
    default: return LpStatus::kSolverFailure;
  }
}

LpSolution run_once(const LinearProgram& lp, const LpOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  const Vector eq_scale = row_scales(lp.eq_matrix, options.scale_rows);
  const Vector ineq_scale = row_scales(lp.ineq_matrix, options.scale_rows);

  Highs highs;
  configure(highs, options);
  LpSolution out;
  if (highs.passModel(to_highs(lp, eq_scale, ineq_scale)) == HighsStatus::kError) {
    out.status = LpStatus::kSolverFailure;
    out.message = "backend rejected the model";
    return out;
  }
  const HighsStatus run_status = highs.run();
  const HighsModelStatus model_status = highs.getModelStatus();
  out.status = map_status(model_status);
  out.message = highs.modelStatusToString(model_status);
  if (run_status == HighsStatus::kError && out.status == LpStatus::kOptimal) {
    out.status = LpStatus::kSolverFailure;
  }
  if (model_status == HighsModelStatus::kUnboundedOrInfeasible) {
    // With a zero objective nothing can be unbounded.
    if (!lp.has_objective()) out.status = LpStatus::kInfeasible;
  }
  const HighsInfo& info = highs.getInfo();
  out.iterations = info.simplex_iteration_count + info.ipm_iteration_count;

  const Eigen::Index n_eq = lp.num_eq();
  const Eigen::Index n_in = lp.num_ineq();
  if (out.status == LpStatus::kOptimal) {
    const HighsSolution& sol = highs.getSolution();
    out.x = Eigen::Map<const Vector>(sol.col_value.data(), lp.num_vars);
    out.objective = lp.objective.size() == lp.num_vars ? lp.objective.dot(out.x) : 0.0;
    if (sol.dual_valid) {
      out.eq_duals.resize(n_eq);
      out.ineq_duals.resize(n_in);
      for (Eigen::Index r = 0; r < n_eq; ++r) out.eq_duals(r) = sol.row_dual[r] * eq_scale(r);
      for (Eigen::Index r = 0; r < n_in; ++r) {
        out.ineq_duals(r) = sol.row_dual[n_eq + r] * ineq_scale(r);
      }
    }
  } else if (out.status == LpStatus::kInfeasible) {
    bool has_ray = false;
    std::vector<double> ray(static_cast<std::size_t>(n_eq + n_in));
    if (highs.getDualRay(has_ray, ray.data()) == HighsStatus::kOk && has_ray) {
      Vector r(n_eq + n_in);
      for (Eigen::Index i = 0; i < n_eq; ++i) r(i) = ray[i] * eq_scale(i);
      for (Eigen::Index i = 0; i < n_in; ++i) r(n_eq + i) = ray[n_eq + i] * ineq_scale(i);
      out.dual_ray = std::move(r);
    }
  }
  out.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace

LpSolution solve(const LinearProgram& lp, const LpOptions& options) {
  lp.validate();
  if (lp.num_vars == 0) {
    LpSolution out;
    const bool ok = (lp.num_eq() == 0 || lp.eq_rhs.cwiseAbs().maxCoeff() == 0.0) &&
                    (lp.num_ineq() == 0 || lp.ineq_rhs.minCoeff() >= 0.0);
    out.status = ok ? LpStatus::kOptimal : LpStatus::kInfeasible;
    out.x = Vector(0);
    return out;
  }
  LpSolution out = run_once(lp, options);
  // Presolve sometimes cannot separate infeasible from unbounded, and the
  // simplex occasionally stalls on badly scaled instances; retry once with
  // a different configuration before reporting failure.
  if (out.status == LpStatus::kSolverFailure) {
    LpOptions retry = options;
    retry.presolve = !options.presolve;
    retry.method = options.method == LpMethod::kIpm ? LpMethod::kSimplex : LpMethod::kIpm;
    LpSolution second = run_once(lp, retry);
    second.seconds += out.seconds;
    if (second.status != LpStatus::kSolverFailure) return second;
    second.message = fmt::format("{} (retry: {})", out.message, second.message);
    return second;
  }
  return out;
}

struct IncrementalLp::Impl {
  Highs highs;
  Eigen::Index num_vars = 0;
};

IncrementalLp::IncrementalLp(Eigen::Index num_vars, const LpOptions& options)
    : impl_(std::make_unique<Impl>()) {
  impl_->num_vars = num_vars;
  Highs& h = impl_->highs;
  LpOptions opts = options;
  opts.presolve = false;
  opts.method = LpMethod::kSimplex;
  configure(h, opts);
  HighsLp lp;
  lp.num_col_ = static_cast<HighsInt>(num_vars);
  lp.num_row_ = 0;
  lp.col_cost_.assign(static_cast<std::size_t>(num_vars), 0.0);
  lp.col_lower_.assign(static_cast<std::size_t>(num_vars), -kInf);
  lp.col_upper_.assign(static_cast<std::size_t>(num_vars), kInf);
  lp.a_matrix_.format_ = MatrixFormat::kColwise;
  lp.a_matrix_.num_col_ = lp.num_col_;
  lp.a_matrix_.num_row_ = 0;
  lp.a_matrix_.start_.assign(static_cast<std::size_t>(num_vars) + 1, 0);
  lp.sense_ = ObjSense::kMaximize;
  h.passModel(std::move(lp));
}

IncrementalLp::~IncrementalLp() = default;
IncrementalLp::IncrementalLp(IncrementalLp&&) noexcept = default;
IncrementalLp& IncrementalLp::operator=(IncrementalLp&&) noexcept = default;

Eigen::Index IncrementalLp::num_vars() const { return impl_->num_vars; }

Eigen::Index IncrementalLp::num_rows() const { return impl_->highs.getNumRow(); }

void IncrementalLp::add_row(const RowVector& a, double b) {
  std::vector<HighsInt> idx;
  std::vector<double> val;
  const double scale = a.cwiseAbs().maxCoeff() > 0.0 ? 1.0 / a.cwiseAbs().maxCoeff() : 1.0;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    if (a(k) != 0.0) {
      idx.push_back(static_cast<HighsInt>(k));
      val.push_back(a(k) * scale);
    }
  }
  impl_->highs.addRow(-kInf, b * scale, static_cast<HighsInt>(idx.size()), idx.data(), val.data());
}

void IncrementalLp::truncate_rows(Eigen::Index count) {
  const HighsInt total = impl_->highs.getNumRow();
  if (count < total) impl_->highs.deleteRows(static_cast<HighsInt>(count), total - 1);
}

LpSolution IncrementalLp::maximize(const Vector& c) {
  const auto t0 = std::chrono::steady_clock::now();
  Highs& h = impl_->highs;
  h.changeColsCost(0, static_cast<HighsInt>(impl_->num_vars) - 1, c.data());
  h.run();
  LpSolution out;
  const HighsModelStatus s = h.getModelStatus();
  out.status = map_status(s);
  out.message = h.modelStatusToString(s);
  if (out.status == LpStatus::kOptimal) {
    const HighsSolution& sol = h.getSolution();
    out.x = Eigen::Map<const Vector>(sol.col_value.data(), impl_->num_vars);
    out.objective = c.dot(out.x);
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace ddinv

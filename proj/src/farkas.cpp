#include "ddinv/farkas.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

namespace ddinv {

void ContainmentProblem::validate() const {
  if (A.cols() != B.cols()) {
    throw std::invalid_argument(fmt::format(
        "ContainmentProblem: A has {} columns but B has {}", A.cols(), B.cols()));
  }
  if (A.rows() != c.size() || B.rows() != d.size()) {
    throw std::invalid_argument("ContainmentProblem: right-hand side length mismatch");
  }
}

LinearProgram build_containment_lp(const ContainmentProblem& prob) {
  prob.validate();
  const Eigen::Index p = prob.p(), q = prob.q(), n = prob.n();
  LinearProgram lp(q * p);
  std::fill(lp.domains.begin(), lp.domains.end(), VarDomain::kNonnegative);

  std::vector<Triplet> eq;
  eq.reserve(static_cast<std::size_t>((prob.A.array() != 0.0).count() * q));
  for (Eigen::Index i = 0; i < q; ++i) {
    for (Eigen::Index k = 0; k < p; ++k) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (prob.A(k, j) != 0.0) eq.emplace_back(i * n + j, i * p + k, prob.A(k, j));
      }
    }
  }
  lp.eq_matrix = sparse_from_triplets(q * n, q * p, eq);
  lp.eq_rhs = vec(prob.B.transpose());

  std::vector<Triplet> ineq;
  for (Eigen::Index i = 0; i < q; ++i) {
    for (Eigen::Index k = 0; k < p; ++k) {
      if (prob.c(k) != 0.0) ineq.emplace_back(i, i * p + k, prob.c(k));
    }
  }
  lp.ineq_matrix = sparse_from_triplets(q, q * p, ineq);
  lp.ineq_rhs = prob.d;
  return lp;
}

FarkasCertificate certificate_from_lp_point(const ContainmentProblem& prob, const Vector& x) {
  if (x.size() != prob.q() * prob.p()) {
    throw std::invalid_argument("certificate_from_lp_point: wrong point length");
  }
  // Row-major flattening of E equals column-major flattening of E'.
  return {unvec(x, prob.p(), prob.q()).transpose()};
}

std::string CertificateReport::summary() const {
  return fmt::format("{}: sign {:.3e}, equality {:.3e}, inequality {:.3e} (tol {:.1e}, scaled {:.3e})",
                     passed ? "pass" : "FAIL", sign_violation, equality_residual,
                     inequality_violation, tol, scaled_tol);
}

Json CertificateReport::to_json() const {
  return Json{{"passed", passed},
              {"sign_violation", sign_violation},
              {"equality_residual", equality_residual},
              {"inequality_violation", inequality_violation},
              {"tol", tol},
              {"scaled_tol", scaled_tol}};
}

CertificateReport verify_certificate(const ContainmentProblem& prob, const FarkasCertificate& cert,
                                     double tol) {
  prob.validate();
  if (cert.E.rows() != prob.q() || cert.E.cols() != prob.p()) {
    throw std::invalid_argument(fmt::format("verify_certificate: E is {}x{}, expected {}x{}",
                                            cert.E.rows(), cert.E.cols(), prob.q(), prob.p()));
  }
  CertificateReport r;
  r.tol = tol;
  r.scaled_tol = tol * std::max(1.0, inf_norm(prob.B));
  if (cert.E.size() > 0) r.sign_violation = std::max(0.0, -cert.E.minCoeff());
  if (prob.B.size() > 0) r.equality_residual = (cert.E * prob.A - prob.B).cwiseAbs().maxCoeff();
  if (prob.q() > 0) {
    r.inequality_violation = std::max(0.0, (cert.E * prob.c - prob.d).maxCoeff());
  }
  r.passed = r.sign_violation <= tol && r.equality_residual <= r.scaled_tol &&
             r.inequality_violation <= r.scaled_tol;
  return r;
}

const char* to_string(ContainmentStatus status) {
  switch (status) {
    case ContainmentStatus::kContained: return "contained";
    case ContainmentStatus::kNotContained: return "not_contained";
    case ContainmentStatus::kSolverFailure: return "solver_failure";
  }
  return "unknown";
}

ContainmentResult solve_containment(const ContainmentProblem& prob, const LpOptions& lp_options,
                                    double tol) {
  ContainmentResult out;
  out.lp = solve(build_containment_lp(prob), lp_options);
  switch (out.lp.status) {
    case LpStatus::kOptimal:
      out.certificate = certificate_from_lp_point(prob, out.lp.x);
      out.report = verify_certificate(prob, *out.certificate, tol);
      out.status = out.report->passed ? ContainmentStatus::kContained
                                      : ContainmentStatus::kSolverFailure;
      break;
    case LpStatus::kInfeasible:
      out.status = ContainmentStatus::kNotContained;
      break;
    default:
      out.status = ContainmentStatus::kSolverFailure;
  }
  return out;
}

bool no_degenerate_alternative(const Matrix& A, const Vector& c, const LpOptions& lp_options) {
  if (A.rows() != c.size()) throw std::invalid_argument("no_degenerate_alternative: size mismatch");
  const Eigen::Index p = A.rows();
  LinearProgram lp(p);
  std::fill(lp.domains.begin(), lp.domains.end(), VarDomain::kNonnegative);
  lp.eq_matrix = Matrix(A.transpose()).sparseView();
  lp.eq_rhs = Vector::Zero(A.cols());
  lp.ineq_matrix = Matrix(c.transpose()).sparseView();
  lp.ineq_rhs = Vector::Constant(1, -1.0);
  const LpSolution sol = solve(lp, lp_options);
  if (sol.status == LpStatus::kInfeasible) return true;
  if (sol.status == LpStatus::kOptimal) return false;
  throw SolverError("no_degenerate_alternative: " + sol.message);
}

void write_certificate(const std::filesystem::path& stem, const ContainmentProblem& prob,
                       const FarkasCertificate& cert, const CertificateReport& report) {
  auto csv = stem;
  csv += ".csv";
  auto meta = stem;
  meta += ".json";
  write_matrix_csv(csv, cert.E);
  Json j{{"matrix", csv.filename().string()},
         {"rows", cert.E.rows()},
         {"cols", cert.E.cols()},
         {"ambient_dim", prob.n()},
         {"report", report.to_json()}};
  write_json(meta, j);
}

FarkasCertificate read_certificate(const std::filesystem::path& stem) {
  auto csv = stem;
  csv += ".csv";
  return {read_matrix_csv(csv)};
}

}  // namespace ddinv

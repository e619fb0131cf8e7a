#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "ddinv/io.hpp"
#include "ddinv/linalg.hpp"
#include "ddinv/lp.hpp"

namespace ddinv {

inline constexpr double kDefaultCertificateTol = 1e-6;

/// Does B x <= d hold for every x with A x <= c?
struct ContainmentProblem {
  Matrix A;  // p x n
  Vector c;  // p
  Matrix B;  // q x n
  Vector d;  // q

  Eigen::Index p() const { return A.rows(); }
  Eigen::Index q() const { return B.rows(); }
  Eigen::Index n() const { return A.cols(); }

  /// Throws std::invalid_argument on inconsistent dimensions.
  void validate() const;
};

/// Multipliers E (q x p) with E >= 0, B = E A and E c <= d.
struct FarkasCertificate {
  Matrix E;
};

/// Feasibility LP in vec_r(E), the row-major flattening: variable i*p + k
/// is E(i, k). Rows: q*n equalities (row i*n + j reads sum_k E(i,k) A(k,j)
/// = B(i,j)), then q inequalities E c <= d. All variables nonnegative.
LinearProgram build_containment_lp(const ContainmentProblem& prob);

/// Reads E back from an LP point of build_containment_lp.
FarkasCertificate certificate_from_lp_point(const ContainmentProblem& prob, const Vector& x);

struct CertificateReport {
  /// max(0, -min E).
  double sign_violation = 0.0;
  /// max |E A - B|.
  double equality_residual = 0.0;
  /// max(0, max(E c - d)).
  double inequality_violation = 0.0;
  double tol = kDefaultCertificateTol;
  /// tol * max(1, |B|_inf), applied to the equality and inequality checks.
  /// The sign check uses tol unscaled.
  double scaled_tol = kDefaultCertificateTol;
  bool passed = false;

  std::string summary() const;
  Json to_json() const;
};

/// Never throws on bad certificates; failures are report content. Throws
/// std::invalid_argument only on dimension mismatch.
CertificateReport verify_certificate(const ContainmentProblem& prob, const FarkasCertificate& cert,
                                     double tol = kDefaultCertificateTol);

enum class ContainmentStatus { kContained, kNotContained, kSolverFailure };

const char* to_string(ContainmentStatus status);

struct ContainmentResult {
  ContainmentStatus status = ContainmentStatus::kSolverFailure;
  std::optional<FarkasCertificate> certificate;
  std::optional<CertificateReport> report;
  LpSolution lp;
};

/// Builds and solves the containment LP and verifies the certificate it
/// returns. The caller is responsible for {A x <= c} being nonempty.
ContainmentResult solve_containment(const ContainmentProblem& prob, const LpOptions& lp_options = {},
                                    double tol = kDefaultCertificateTol);

/// True when {e >= 0, e'A = 0, e'c <= -1} is infeasible, which holds
/// whenever {A x <= c} is nonempty. Throws SolverError on backend failure.
bool no_degenerate_alternative(const Matrix& A, const Vector& c, const LpOptions& lp_options = {});

/// Writes `<stem>.csv` (E) and `<stem>.json` (dimensions, tolerance,
/// violations, pass/fail).
void write_certificate(const std::filesystem::path& stem, const ContainmentProblem& prob,
                       const FarkasCertificate& cert, const CertificateReport& report);

/// Reads E from `<stem>.csv`.
FarkasCertificate read_certificate(const std::filesystem::path& stem);

}  // namespace ddinv

#pragma once

#include <optional>
#include <span>
#include <string>

#include "covdecomp/model.hpp"

namespace covdecomp {

/// Identifiability (A.0-A.3) and sample-regime (A.4-A.5) diagnostics for a
/// ground-truth model.
struct AssumptionReport {
  // A.0
  bool a0_pd = false;
  // A.1
  double a1_lambda_star = 0.0;
  // A.2: zero residual diagonal, and the residual/box support relation in
  // each direction. a2_support_ok is diag && forward (&& reverse when strict).
  bool a2_diag_ok = false;
  bool a2_forward_ok = false;  // nonzero residual => |J_ij| == lambda*
  bool a2_reverse_ok = false;  // |J_ij| == lambda* => nonzero residual
  bool a2_support_ok = false;
  // A.3
  bool a3_signs_ok = false;

  // A.4 / A.5
  double a4_incoherence_lhs = 0.0;
  std::optional<double> a4_alpha;
  double a4_k_ssr = 0.0;
  double a5_k_ss = 0.0;
  std::optional<long> a5_m_feasible;

  double k_m = 0.0;
  int degree = 0;
  double j_min = 0.0;
  double sigma_r_min = 0.0;

  bool exact_ok() const { return a0_pd && a2_support_ok && a3_signs_ok; }
  bool incoherence_ok() const { return a4_alpha.has_value() && a4_k_ssr < 0.25; }
  bool covariance_control_ok() const { return a5_m_feasible.has_value(); }

  /// key=value lines followed by a PASS/FAIL summary per assumption.
  std::string to_text() const;
};

struct CheckOptions {
  double tol = 1e-9;  // relative tolerance for |J_ij| == lambda*
  /// Also demand the reverse direction of the support relation. Grid models
  /// with equal edge magnitudes and a partial residual set never satisfy it.
  bool strict_support = false;
};

inline double lambda_star(const SymmetricMatrix& j_m) { return elementwise_linf_off(j_m); }

/// Fills a0-a3 and a1_lambda_star.
AssumptionReport check_exact(const SymmetricMatrix& j_m, const SymmetricMatrix& sigma_r,
                             const CheckOptions& options = {});

/// Rows/columns of Sigma (x) Sigma indexed by ordered pairs:
/// entry ((i,j),(k,l)) = sigma(i,k) * sigma(j,l). Pairs are used in the
/// order given; partitions hold them sorted lexicographically.
Eigen::MatrixXd hessian_submatrix(const SymmetricMatrix& sigma_m, std::span<const OrderedPair> rows,
                                  std::span<const OrderedPair> cols);

/// Fills a4_*, a5_* and k_m. Throws SingularGamma when Gamma_SS is not
/// positive definite or its condition number exceeds 1e12.
void incoherence(const SymmetricMatrix& sigma_m, const SupportPartition& partition, AssumptionReport& report);

/// Smallest integer m in [5, 1e6] with k_ss <= (m-4) alpha / (4 (m - (m-1) alpha)).
std::optional<long> covariance_control_m(double k_ss, double alpha);

/// Everything: check_exact, incoherence on the true partition, degree and
/// minimum magnitudes.
AssumptionReport check_all(const GroundTruthModel& model, const CheckOptions& options = {});

}  // namespace covdecomp

#pragma once

#include <utility>
#include <vector>

#include "covdecomp/matrix.hpp"

namespace covdecomp {

/// Gaussian in information form, density ~ exp(-x'Jx/2 + h'x).
struct InfoModel {
  SymmetricMatrix j;
  Eigen::VectorXd h;

  /// h = J mu.
  static InfoModel from_mean(const SymmetricMatrix& j, const Eigen::VectorXd& mean);
};

struct LbpTrace {
  int iterations = 0;
  std::vector<double> mean_error;      // average |mu_i - exact mu_i| per iteration
  std::vector<double> variance_error;  // average |var_i - exact var_i| per iteration
  bool converged = false;
  double rho_bar = 0.0;                // spectral radius of the partial correlation matrix
};

/// |J_ij| / sqrt(J_ii J_jj) off the diagonal, zero on it. InvalidInput for a
/// non-positive diagonal.
SymmetricMatrix partial_correlation_abs(const SymmetricMatrix& j);

struct WalkSummability {
  bool walk_summable;
  double rho_bar;
};

WalkSummability walk_summable(const SymmetricMatrix& j);

struct Moments {
  Eigen::VectorXd means;
  Eigen::VectorXd variances;
};

/// means = J^{-1} h, variances = diag(J^{-1}).
Moments exact_moments(const InfoModel& model);

struct GabpOptions {
  int max_iterations = 100;
  double tol = 1e-10;
  double damping = 0.0;  // new = (1 - damping) * update + damping * old
};

/// Synchronous (flooding) Gaussian BP from zero messages.
///
/// Message i -> j carries a precision and a potential:
///   P_ij = -J_ij^2 / (P_i - P_ji),  H_ij = -J_ij (H_i - H_ji) / (P_i - P_ji)
/// with node beliefs P_i = J_ii + sum_k P_ki, H_i = h_i + sum_k H_ki. The run
/// stops when the largest parameter change is below tol (converged), when a
/// cavity or belief precision becomes <= 0 or any parameter exceeds 1e12
/// (diverged; the trace ends at that iteration), or at max_iterations.
LbpTrace gabp_run(const InfoModel& model, const GabpOptions& options);

/// The same GaBP run on the Markov component and on the composite model.
std::pair<LbpTrace, LbpTrace> lbp_compare(const InfoModel& markov, const InfoModel& composite,
                                          const GabpOptions& options);

}  // namespace covdecomp

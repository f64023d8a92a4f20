#pragma once

#include <limits>
#include <vector>

#include "covdecomp/matrix.hpp"
#include "covdecomp/model.hpp"

namespace covdecomp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Penalized log-det program
///
///   min_{J > 0}  <S, J> - log det J + gamma * sum_{i != j} |J_ij|
///   s.t.         |J_ij| <= lambda  for i != j
///
/// gamma = 0 is the exact-statistics program; lambda = infinity drops the
/// box and leaves the plain l1-penalized MLE.
struct SolverOptions {
  double gamma = 0.0;
  double lambda = kInfinity;
  double tol = 1e-8;            // stop when the KKT stationarity residual <= tol
  int max_iterations = 50000;
  double active_tol = 1e-7;     // |J_ij| within this of lambda counts as on the box
  double initial_step = 1.0;
  double backtrack_factor = 0.5;
  /// Start each backtracking search from the Barzilai-Borwein step instead of
  /// initial_step.
  bool spectral_step = true;
  bool record_objective = false;

  void validate() const;
};

/// gamma = c1 sqrt(ln p / n), lambda = lambda_star + c2 sqrt(ln p / n).
///
/// The defaults were tuned once on the 8x8 grid experiment (n from 1000 to
/// 8000) and are frozen: c1 = 6 is large enough that false Markov edges die
/// out as n grows for both methods, and the resulting shrinkage keeps
/// residual-free edges off the box so c2 can stay small.
struct ScheduleConfig {
  double c1 = 6.0;
  double c2 = 0.5;
  double lambda_star = 0.0;
};

struct Regularization {
  double gamma;
  double lambda;
};

Regularization regularization_schedule(int p, int n, const ScheduleConfig& schedule);

struct KktReport {
  double stationarity_residual = 0.0;
  double dual_feasibility_residual = 0.0;
  double box_violation = 0.0;
  bool converged = false;
};

/// <S, J> - log det J + gamma ||J||_{1,off}. Throws NotPositiveDefinite.
double objective(const SymmetricMatrix& sigma_hat, const SymmetricMatrix& j, double gamma);

/// argmin_x (1/2)(x - value)^2 + gamma |x| subject to |x| <= lambda:
/// soft-threshold by gamma, then clip to [-lambda, lambda].
double prox_l1_box(double value, double gamma, double lambda);

struct PrimalSolution {
  SymmetricMatrix j_m_hat;
  SymmetricMatrix sigma_m_hat;  // j_m_hat^{-1}
  KktReport kkt;
  int iterations = 0;
  double objective = 0.0;
  std::vector<double> objective_history;  // filled when record_objective is set
};

/// Proximal gradient with backtracking, started from diag(1 / S_ii).
///
/// Hitting max_iterations is not an exception: the last (and best) iterate
/// comes back with kkt.converged == false. Throws InvalidInput for a
/// non-positive diagonal and NotPositiveDefinite when gamma == 0 and S is
/// not positive definite.
PrimalSolution solve_primal(const SymmetricMatrix& sigma_hat, const SolverOptions& options);

/// Residual covariance from the box multipliers of a primal solution:
/// on entries where the box is active, S_ij - (J^{-1})_ij + gamma sign(J_ij);
/// zero elsewhere and on the diagonal. Throws DualInfeasible if
/// ||S - J^{-1} - R||_{inf,off} exceeds gamma by more than 10 tol.
SymmetricMatrix recover_dual(const SymmetricMatrix& sigma_hat, const SymmetricMatrix& j_m_hat,
                             const SolverOptions& options);

/// Stationarity of S - J^{-1} - sigma_r + gamma Z with the best valid
/// subgradient Z, dual feasibility of the pair, and box violation.
KktReport kkt_residual(const SymmetricMatrix& sigma_hat, const SymmetricMatrix& j, const SymmetricMatrix& sigma_r,
                       const SolverOptions& options);

/// solve_primal followed by recover_dual.
DecompositionEstimate decompose(const SymmetricMatrix& sigma_hat, const SolverOptions& options);

/// gamma = 0 decomposition of an exact covariance with box bound lambda.
DecompositionEstimate decompose_exact(const SymmetricMatrix& sigma, double lambda);

}  // namespace covdecomp

#include "covdecomp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "covdecomp/error.hpp"

namespace covdecomp {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

double l1_off(const Eigen::MatrixXd& j) { return j.cwiseAbs().sum() - j.diagonal().cwiseAbs().sum(); }

bool on_box(double x, const SolverOptions& o) {
  return std::isfinite(o.lambda) && x != 0.0 && o.lambda - std::abs(x) <= o.active_tol;
}

/// Stationarity with the box multiplier chosen optimally (it is what
/// recover_dual will later report as the residual covariance).
double stationarity(const Eigen::MatrixXd& grad, const Eigen::MatrixXd& j, const SolverOptions& o) {
  const auto p = j.rows();
  double r = 0.0;
  for (Eigen::Index c = 0; c < p; ++c) {
    r = std::max(r, std::abs(grad(c, c)));
    for (Eigen::Index i = c + 1; i < p; ++i) {
      const double x = j(i, c);
      const double g = grad(i, c);
      double v;
      if (x == 0.0) {
        v = std::max(0.0, std::abs(g) - o.gamma);
      } else if (on_box(x, o)) {
        v = std::max(0.0, sign(x) * g + o.gamma);
      } else {
        v = std::abs(g + o.gamma * sign(x));
      }
      r = std::max(r, v);
    }
  }
  return r;
}

struct Iterate {
  Eigen::MatrixXd j;
  CholeskyFactor factor;
  double smooth;  // <S, J> - log det J
};

std::optional<Iterate> evaluate(const Eigen::MatrixXd& s, Eigen::MatrixXd j) {
  auto factor = CholeskyFactor::try_factor(j);
  if (!factor) return std::nullopt;
  const double smooth = s.cwiseProduct(j).sum() - factor->log_det();
  if (!std::isfinite(smooth)) return std::nullopt;
  return Iterate{std::move(j), std::move(*factor), smooth};
}

void check_input(const SymmetricMatrix& sigma_hat, const SolverOptions& options) {
  options.validate();
  for (int i = 0; i < sigma_hat.dim(); ++i)
    if (!(sigma_hat(i, i) > 0.0))
      throw Error(ErrorCode::InvalidInput, "sample covariance needs a strictly positive diagonal");
}

}  // namespace

void SolverOptions::validate() const {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw Error(ErrorCode::InvalidInput, "gamma must be finite and >= 0");
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidInput, "lambda must be > 0 (inf allowed)");
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidInput, "tol must be > 0");
  if (max_iterations < 1) throw Error(ErrorCode::InvalidInput, "max_iterations must be >= 1");
  if (!(active_tol > 0.0)) throw Error(ErrorCode::InvalidInput, "active_tol must be > 0");
  if (!(initial_step > 0.0)) throw Error(ErrorCode::InvalidInput, "initial_step must be > 0");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0))
    throw Error(ErrorCode::InvalidInput, "backtrack_factor must lie in (0, 1)");
}

Regularization regularization_schedule(int p, int n, const ScheduleConfig& schedule) {
  if (p < 2) throw Error(ErrorCode::InvalidInput, "schedule needs p >= 2");
  if (n < 1) throw Error(ErrorCode::InvalidInput, "schedule needs n >= 1");
  if (!(schedule.c1 > 0.0) || !(schedule.c2 > 0.0)) throw Error(ErrorCode::InvalidInput, "c1 and c2 must be > 0");
  const double rate = std::sqrt(std::log(static_cast<double>(p)) / static_cast<double>(n));
  return {schedule.c1 * rate, schedule.lambda_star + schedule.c2 * rate};
}

double objective(const SymmetricMatrix& sigma_hat, const SymmetricMatrix& j, double gamma) {
  if (sigma_hat.dim() != j.dim()) throw Error(ErrorCode::DimMismatch, "objective");
  auto factor = CholeskyFactor::try_factor(j.dense());
  if (!factor) throw Error(ErrorCode::NotPositiveDefinite, "objective is only defined for J > 0");
  return sigma_hat.dense().cwiseProduct(j.dense()).sum() - factor->log_det() + gamma * l1_off(j.dense());
}

double prox_l1_box(double value, double gamma, double lambda) {
  const double shrunk = sign(value) * std::max(std::abs(value) - gamma, 0.0);
  return std::clamp(shrunk, -lambda, lambda);
}

PrimalSolution solve_primal(const SymmetricMatrix& sigma_hat, const SolverOptions& options) {
  check_input(sigma_hat, options);
  if (options.gamma == 0.0 && !is_positive_definite(sigma_hat))
    throw Error(ErrorCode::NotPositiveDefinite, "gamma = 0 needs a positive definite covariance");

  const Eigen::MatrixXd& s = sigma_hat.dense();
  const auto p = s.rows();
  const double gamma = options.gamma;
  const double lambda = options.lambda;

  Eigen::MatrixXd j0 = Eigen::MatrixXd::Zero(p, p);
  j0.diagonal() = s.diagonal().cwiseInverse();
  std::optional<Iterate> cur = evaluate(s, std::move(j0));
  if (!cur) throw Error(ErrorCode::NotPositiveDefinite, "initial iterate is not positive definite");

  Eigen::MatrixXd sigma_m = cur->factor.inverse();
  Eigen::MatrixXd grad = s - sigma_m;
  double total = cur->smooth + gamma * l1_off(cur->j);

  PrimalSolution out{sigma_hat, sigma_hat, {}, 0, 0.0, {}};
  if (options.record_objective) out.objective_history.push_back(total);

  Eigen::MatrixXd prev_j, prev_grad;
  double residual = stationarity(grad, cur->j, options);
  int iter = 0;
  bool stalled = false;
  Eigen::MatrixXd candidate(p, p);

  while (residual > options.tol && iter < options.max_iterations) {
    double step = options.initial_step;
    if (options.spectral_step && iter > 0) {
      const Eigen::MatrixXd ds = cur->j - prev_j;
      const double sy = ds.cwiseProduct(grad - prev_grad).sum();
      const double ss = ds.squaredNorm();
      if (sy > 0.0 && ss > 0.0) step = std::clamp(ss / sy, 1e-8, 1e8);
    }

    std::optional<Iterate> next;
    while (true) {
      candidate = cur->j - step * grad;
      for (Eigen::Index c = 0; c < p; ++c) {
        for (Eigen::Index i = c + 1; i < p; ++i) {
          const double v = prox_l1_box(candidate(i, c), step * gamma, lambda);
          candidate(i, c) = v;
          candidate(c, i) = v;
        }
      }
      next = evaluate(s, candidate);
      if (next) {
        const Eigen::MatrixXd d = next->j - cur->j;
        const double model = cur->smooth + grad.cwiseProduct(d).sum() + d.squaredNorm() / (2.0 * step);
        // Slack of a few ulps of the quantities being compared.
        const double slack = 16.0 * kEps * (std::abs(cur->smooth) + std::abs(next->smooth) + 1.0);
        if (next->smooth <= model + slack) break;
      }
      step *= options.backtrack_factor;
      if (step < 1e-16) {
        stalled = true;
        break;
      }
    }
    if (stalled) break;

    prev_j = std::move(cur->j);
    prev_grad = std::move(grad);
    cur = std::move(next);
    sigma_m = cur->factor.inverse();
    grad = s - sigma_m;
    total = cur->smooth + gamma * l1_off(cur->j);
    if (options.record_objective) out.objective_history.push_back(total);
    residual = stationarity(grad, cur->j, options);
    ++iter;
  }

  out.j_m_hat = SymmetricMatrix(cur->j);
  out.sigma_m_hat = SymmetricMatrix(sigma_m);
  out.iterations = iter;
  out.objective = total;
  out.kkt.stationarity_residual = residual;
  out.kkt.box_violation = std::isfinite(lambda) ? std::max(0.0, elementwise_linf_off(out.j_m_hat) - lambda) : 0.0;
  out.kkt.converged = residual <= options.tol;
  return out;
}

SymmetricMatrix recover_dual(const SymmetricMatrix& sigma_hat, const SymmetricMatrix& j_m_hat,
                             const SolverOptions& options) {
  if (sigma_hat.dim() != j_m_hat.dim()) throw Error(ErrorCode::DimMismatch, "recover_dual");
  const int p = sigma_hat.dim();
  const Eigen::MatrixXd sigma_m = inverse_spd(j_m_hat).dense();
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(p, p);
  double worst = 0.0;
  for (int c = 0; c < p; ++c) {
    for (int i = c + 1; i < p; ++i) {
      const double x = j_m_hat(i, c);
      const double g = sigma_hat(i, c) - sigma_m(i, c);
      if (on_box(x, options)) {
        const double v = g + options.gamma * sign(x);
        r(i, c) = v;
        r(c, i) = v;
      }
      worst = std::max(worst, std::abs(g - r(i, c)));
    }
  }
  if (worst - options.gamma > 10.0 * options.tol) {
    throw Error(ErrorCode::DualInfeasible, "||S - J^{-1} - R||_{inf,off} exceeds gamma by " +
                                               std::to_string(worst - options.gamma));
  }
  return SymmetricMatrix(std::move(r));
}

KktReport kkt_residual(const SymmetricMatrix& sigma_hat, const SymmetricMatrix& j, const SymmetricMatrix& sigma_r,
                       const SolverOptions& options) {
  if (sigma_hat.dim() != j.dim() || sigma_r.dim() != j.dim()) throw Error(ErrorCode::DimMismatch, "kkt_residual");
  const int p = j.dim();
  const Eigen::MatrixXd sigma_m = inverse_spd(j).dense();
  KktReport rep;
  double off_max = 0.0;
  for (int c = 0; c < p; ++c) {
    rep.stationarity_residual =
        std::max(rep.stationarity_residual, std::abs(sigma_hat(c, c) - sigma_m(c, c) - sigma_r(c, c)));
    for (int i = c + 1; i < p; ++i) {
      const double g = sigma_hat(i, c) - sigma_m(i, c) - sigma_r(i, c);
      const double x = j(i, c);
      const double v = x == 0.0 ? std::max(0.0, std::abs(g) - options.gamma) : std::abs(g + options.gamma * sign(x));
      rep.stationarity_residual = std::max(rep.stationarity_residual, v);
      off_max = std::max(off_max, std::abs(g));
    }
  }
  rep.dual_feasibility_residual = std::max(0.0, off_max - options.gamma);
  rep.box_violation = std::isfinite(options.lambda) ? std::max(0.0, elementwise_linf_off(j) - options.lambda) : 0.0;
  rep.converged = rep.stationarity_residual <= options.tol;
  return rep;
}

DecompositionEstimate decompose(const SymmetricMatrix& sigma_hat, const SolverOptions& options) {
  PrimalSolution primal = solve_primal(sigma_hat, options);
  SymmetricMatrix sigma_r = recover_dual(sigma_hat, primal.j_m_hat, options);
  return DecompositionEstimate{std::move(primal.j_m_hat),
                               std::move(primal.sigma_m_hat),
                               std::move(sigma_r),
                               primal.iterations,
                               primal.objective,
                               primal.kkt.stationarity_residual,
                               primal.kkt.converged};
}

DecompositionEstimate decompose_exact(const SymmetricMatrix& sigma, double lambda) {
  SolverOptions options;
  options.gamma = 0.0;
  options.lambda = lambda;
  return decompose(sigma, options);
}

}  // namespace covdecomp

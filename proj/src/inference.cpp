#include "covdecomp/inference.hpp"

#include <cmath>

#include "covdecomp/error.hpp"

namespace covdecomp {

namespace {

constexpr double kBlowUp = 1e12;

struct DirectedEdge {
  int from;
  int to;
  int reverse;  // index of to -> from
  double weight;
};

}  // namespace

InfoModel InfoModel::from_mean(const SymmetricMatrix& j, const Eigen::VectorXd& mean) {
  if (mean.size() != j.dim()) throw Error(ErrorCode::DimMismatch, "mean vector length");
  return InfoModel{j, j.dense() * mean};
}

SymmetricMatrix partial_correlation_abs(const SymmetricMatrix& j) {
  const int p = j.dim();
  for (int i = 0; i < p; ++i)
    if (!(j(i, i) > 0.0)) throw Error(ErrorCode::InvalidInput, "partial correlations need a positive diagonal");
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(p, p);
  for (int i = 0; i < p; ++i)
    for (int k = i + 1; k < p; ++k) {
      const double v = std::abs(j(i, k)) / std::sqrt(j(i, i) * j(k, k));
      r(i, k) = v;
      r(k, i) = v;
    }
  return SymmetricMatrix(std::move(r));
}

WalkSummability walk_summable(const SymmetricMatrix& j) {
  const double rho = spectral_radius(partial_correlation_abs(j));
  return {rho < 1.0, rho};
}

Moments exact_moments(const InfoModel& model) {
  if (model.h.size() != model.j.dim()) throw Error(ErrorCode::DimMismatch, "potential vector length");
  auto factor = CholeskyFactor::try_factor(model.j.dense());
  if (!factor) throw Error(ErrorCode::NotPositiveDefinite, "exact moments need J > 0");
  return Moments{factor->solve(model.h), factor->inverse().diagonal()};
}

LbpTrace gabp_run(const InfoModel& model, const GabpOptions& options) {
  if (options.max_iterations < 1) throw Error(ErrorCode::InvalidInput, "max_iterations must be >= 1");
  if (!(options.damping >= 0.0 && options.damping < 1.0)) throw Error(ErrorCode::InvalidInput, "damping in [0, 1)");
  const SymmetricMatrix& j = model.j;
  const int p = j.dim();
  const Moments exact = exact_moments(model);

  LbpTrace trace;
  trace.rho_bar = walk_summable(j).rho_bar;

  std::vector<DirectedEdge> edges;
  std::vector<std::vector<int>> incoming(static_cast<std::size_t>(p));
  for (int a = 0; a < p; ++a)
    for (int b = a + 1; b < p; ++b)
      if (j(a, b) != 0.0) {
        const int ab = static_cast<int>(edges.size());
        edges.push_back({a, b, ab + 1, j(a, b)});
        edges.push_back({b, a, ab, j(a, b)});
        incoming[static_cast<std::size_t>(b)].push_back(ab);
        incoming[static_cast<std::size_t>(a)].push_back(ab + 1);
      }

  const std::size_t m = edges.size();
  std::vector<double> msg_p(m, 0.0), msg_h(m, 0.0), new_p(m), new_h(m);
  Eigen::VectorXd belief_p(p), belief_h(p);

  auto beliefs = [&]() {
    for (int i = 0; i < p; ++i) {
      double bp = j(i, i), bh = model.h(i);
      for (int e : incoming[static_cast<std::size_t>(i)]) {
        bp += msg_p[static_cast<std::size_t>(e)];
        bh += msg_h[static_cast<std::size_t>(e)];
      }
      belief_p(i) = bp;
      belief_h(i) = bh;
    }
  };

  beliefs();
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    bool diverged = false;
    double change = 0.0;
    for (std::size_t e = 0; e < m; ++e) {
      const auto& d = edges[e];
      const auto rev = static_cast<std::size_t>(d.reverse);
      const double cavity_p = belief_p(d.from) - msg_p[rev];
      const double cavity_h = belief_h(d.from) - msg_h[rev];
      if (!(cavity_p > 0.0)) {
        diverged = true;
        break;
      }
      double up = -d.weight * d.weight / cavity_p;
      double uh = -d.weight * cavity_h / cavity_p;
      up = (1.0 - options.damping) * up + options.damping * msg_p[e];
      uh = (1.0 - options.damping) * uh + options.damping * msg_h[e];
      change = std::max({change, std::abs(up - msg_p[e]), std::abs(uh - msg_h[e])});
      new_p[e] = up;
      new_h[e] = uh;
      if (!std::isfinite(up) || !std::isfinite(uh) || std::abs(up) > kBlowUp || std::abs(uh) > kBlowUp) {
        diverged = true;
        break;
      }
    }
    if (diverged) break;
    msg_p.swap(new_p);
    msg_h.swap(new_h);
    beliefs();

    // The iteration that reveals divergence is still recorded when its
    // beliefs are finite; nothing after it is.
    const Eigen::VectorXd means = belief_h.cwiseQuotient(belief_p);
    const Eigen::VectorXd vars = belief_p.cwiseInverse();
    if (!means.allFinite() || !vars.allFinite()) break;
    trace.mean_error.push_back((means - exact.means).cwiseAbs().mean());
    trace.variance_error.push_back((vars - exact.variances).cwiseAbs().mean());
    trace.iterations = iter;
    if ((belief_p.array() <= 0.0).any() || means.cwiseAbs().maxCoeff() > kBlowUp) break;
    if (change < options.tol) {
      trace.converged = true;
      break;
    }
  }
  return trace;
}

std::pair<LbpTrace, LbpTrace> lbp_compare(const InfoModel& markov, const InfoModel& composite,
                                          const GabpOptions& options) {
  if (markov.j.dim() != composite.j.dim()) throw Error(ErrorCode::DimMismatch, "lbp_compare models differ in size");
  return {gabp_run(markov, options), gabp_run(composite, options)};
}

}  // namespace covdecomp

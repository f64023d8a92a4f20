#include "covdecomp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

#include "covdecomp/error.hpp"

namespace covdecomp {

int edit_distance(const SupportSet& a, const SupportSet& b) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::DimMismatch, "edit distance between supports on different node sets");
  std::vector<Edge> diff;
  std::set_symmetric_difference(a.edges().begin(), a.edges().end(), b.edges().begin(), b.edges().end(),
                                std::back_inserter(diff));
  return static_cast<int>(diff.size());
}

double linf_error(const SymmetricMatrix& a, const SymmetricMatrix& b) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::DimMismatch, "linf_error");
  return (a.dense() - b.dense()).cwiseAbs().maxCoeff();
}

ConsistencyVerdict consistency(const SymmetricMatrix& estimate, const SymmetricMatrix& truth, double threshold) {
  if (estimate.dim() != truth.dim()) throw Error(ErrorCode::DimMismatch, "consistency");
  const SupportSet est = support_off(estimate, threshold);
  const SupportSet tru = support_off(truth, 0.0);
  ConsistencyVerdict v;
  v.support_errors = edit_distance(est, tru);
  v.sparsistent = v.support_errors == 0;
  v.sign_consistent = v.sparsistent;
  if (v.sparsistent) {
    for (const auto& e : tru.edges())
      if ((estimate(e.i, e.j) > 0.0) != (truth(e.i, e.j) > 0.0)) v.sign_consistent = false;
  }
  v.linf_error = linf_error(estimate, truth);
  return v;
}

SymmetricMatrix composite_precision(const SymmetricMatrix& j_m_hat, const SymmetricMatrix& sigma_r_hat) {
  const SymmetricMatrix sigma = inverse_spd(j_m_hat) + sigma_r_hat;
  auto factor = CholeskyFactor::try_factor(sigma.dense());
  if (!factor) throw Error(ErrorCode::CompositeNotPD, "J_M^{-1} + Sigma_R is not positive definite");
  return SymmetricMatrix(factor->inverse());
}

}  // namespace covdecomp

#pragma once

#include "covdecomp/matrix.hpp"
#include "covdecomp/model.hpp"

namespace covdecomp {

struct ConsistencyVerdict {
  bool sparsistent = false;
  bool sign_consistent = false;
  int support_errors = 0;
  double linf_error = 0.0;
};

/// Size of the symmetric difference of the edge sets. DimMismatch if the
/// node counts differ.
int edit_distance(const SupportSet& a, const SupportSet& b);

/// max_ij |a_ij - b_ij|.
double linf_error(const SymmetricMatrix& a, const SymmetricMatrix& b);

/// Estimate support is taken at `threshold`, the truth's at exactly zero.
ConsistencyVerdict consistency(const SymmetricMatrix& estimate, const SymmetricMatrix& truth, double threshold);

/// (J_M^{-1} + Sigma_R)^{-1}. CompositeNotPD if the composed covariance is
/// not positive definite.
SymmetricMatrix composite_precision(const SymmetricMatrix& j_m_hat, const SymmetricMatrix& sigma_r_hat);

}  // namespace covdecomp

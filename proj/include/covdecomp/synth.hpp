#pragma once

#include <cstdint>

#include "covdecomp/model.hpp"
#include "covdecomp/rng.hpp"

namespace covdecomp {

/// Grid Markov model with residual edges on a random fraction of the grid
/// edges. Defaults reproduce the reference experiment: 8x8 grid, edge
/// weights +-0.5, 20% of edges carrying a +-0.2 residual.
struct SynthConfig {
  int rows = 8;
  int cols = 8;
  double edge_weight_magnitude = 0.5;
  double residual_fraction = 0.2;
  double residual_magnitude = 0.2;
  // Minimum eigenvalue of J_M. 0.35 puts the median walk-summability
  // radius of the grid model near 0.94.
  double pd_margin = 0.35;
  std::uint64_t seed = 0;

  void validate() const;
  Metadata to_metadata() const;
};

/// 4-nearest-neighbour grid; node (r, c) (1-based) is index (r-1)*cols + c.
SupportSet grid_graph(int rows, int cols);

/// Off-diagonal entries +-magnitude on `support` with fair signs; uniform
/// diagonal |lambda_min(offdiag)| + pd_margin.
SymmetricMatrix gen_markov(const SupportSet& support, double magnitude, double pd_margin, Rng& rng);

/// round-half-up(fraction * |E_M|) Markov edges drawn without replacement,
/// each given -sign(J_ij) * magnitude.
SymmetricMatrix gen_residual(const SymmetricMatrix& j_m, double fraction, double magnitude, Rng& rng);

/// grid -> Markov -> residual -> compose, re-drawing the residual edges up to
/// 100 times if the composite covariance is not PD (GenerationFailed after
/// that). Also draws a per-node mean uniform on [0, 1].
GroundTruthModel gen_model(const SynthConfig& config);

}  // namespace covdecomp

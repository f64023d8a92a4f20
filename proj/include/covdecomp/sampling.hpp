#pragma once

#include <filesystem>

#include "covdecomp/matrix.hpp"
#include "covdecomp/rng.hpp"

namespace covdecomp {

/// n draws of a p-dimensional vector, one per row.
struct SampleSet {
  Eigen::MatrixXd data;  // n x p

  int n() const { return static_cast<int>(data.rows()); }
  int dim() const { return static_cast<int>(data.cols()); }
};

/// Zero-mean Gaussian draws x = L z, L the Cholesky factor of sigma and z
/// standard normal (Box-Muller). Throws NotPositiveDefinite.
SampleSet sample_gaussian(const SymmetricMatrix& sigma, int n, Rng& rng);

/// (1/n) sum_k x_k x_k^T. No centering unless `centered` is set, in which
/// case the sample mean is removed first (divisor stays n).
SymmetricMatrix sample_covariance(const SampleSet& samples, bool centered = false);

void write_samples_csv(const std::filesystem::path& path, const SampleSet& samples);
SampleSet read_samples_csv(const std::filesystem::path& path);

}  // namespace covdecomp

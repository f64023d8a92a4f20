#include "covdecomp/sampling.hpp"

#include "covdecomp/error.hpp"

namespace covdecomp {

SampleSet sample_gaussian(const SymmetricMatrix& sigma, int n, Rng& rng) {
  if (n < 1) throw Error(ErrorCode::InvalidInput, "sample count must be >= 1");
  const Eigen::MatrixXd lower = cholesky(sigma);
  const int p = sigma.dim();
  SampleSet out{Eigen::MatrixXd(n, p)};
  Eigen::VectorXd z(p);
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < p; ++i) z(i) = rng.normal();
    out.data.row(k) = (lower.triangularView<Eigen::Lower>() * z).transpose();
  }
  return out;
}

SymmetricMatrix sample_covariance(const SampleSet& samples, bool centered) {
  if (samples.n() < 1) throw Error(ErrorCode::InvalidInput, "sample covariance needs at least one sample");
  Eigen::MatrixXd x = samples.data;
  if (centered) x.rowwise() -= x.colwise().mean();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(x.cols(), x.cols());
  cov.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
  cov = cov.selfadjointView<Eigen::Lower>();
  return SymmetricMatrix(cov / static_cast<double>(samples.n()));
}

void write_samples_csv(const std::filesystem::path& path, const SampleSet& samples) {
  write_dense_csv(path, samples.data);
}

SampleSet read_samples_csv(const std::filesystem::path& path) { return SampleSet{read_dense_csv(path)}; }

}  // namespace covdecomp

#include "covdecomp/synth.hpp"

#include <cmath>
#include <sstream>

#include "covdecomp/error.hpp"

namespace covdecomp {

namespace {

constexpr int kResidualAttempts = 100;

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

void SynthConfig::validate() const {
  if (rows < 1 || cols < 1) throw Error(ErrorCode::InvalidInput, "grid rows and cols must be >= 1");
  if (!(edge_weight_magnitude > 0.0)) throw Error(ErrorCode::InvalidInput, "edge weight magnitude must be > 0");
  if (!(residual_fraction >= 0.0 && residual_fraction <= 1.0))
    throw Error(ErrorCode::InvalidInput, "residual fraction must lie in [0, 1]");
  if (!(residual_magnitude > 0.0)) throw Error(ErrorCode::InvalidInput, "residual magnitude must be > 0");
  if (!(pd_margin > 0.0)) throw Error(ErrorCode::InvalidInput, "pd margin must be > 0");
}

Metadata SynthConfig::to_metadata() const {
  return {{"rows", std::to_string(rows)},
          {"cols", std::to_string(cols)},
          {"edge_weight_magnitude", fmt_double(edge_weight_magnitude)},
          {"residual_fraction", fmt_double(residual_fraction)},
          {"residual_magnitude", fmt_double(residual_magnitude)},
          {"pd_margin", fmt_double(pd_margin)},
          {"seed", std::to_string(seed)}};
}

SupportSet grid_graph(int rows, int cols) {
  if (rows < 1 || cols < 1) throw Error(ErrorCode::InvalidInput, "grid rows and cols must be >= 1");
  std::vector<Edge> edges;
  auto index = [cols](int r, int c) { return r * cols + c; };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) edges.push_back({index(r, c), index(r, c + 1)});
      if (r + 1 < rows) edges.push_back({index(r, c), index(r + 1, c)});
    }
  }
  return SupportSet(rows * cols, std::move(edges));
}

SymmetricMatrix gen_markov(const SupportSet& support, double magnitude, double pd_margin, Rng& rng) {
  if (!(magnitude > 0.0) || !(pd_margin > 0.0))
    throw Error(ErrorCode::InvalidInput, "magnitude and pd margin must be > 0");
  const int p = support.dim();
  Eigen::MatrixXd off = Eigen::MatrixXd::Zero(p, p);
  for (const auto& e : support.edges()) {
    const double w = rng.coin() ? magnitude : -magnitude;
    off(e.i, e.j) = w;
    off(e.j, e.i) = w;
  }
  double lambda_min = 0.0;
  if (!support.empty()) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(off, Eigen::EigenvaluesOnly);
    lambda_min = eig.eigenvalues().minCoeff();
  }
  const double c = std::abs(lambda_min) + pd_margin;
  Eigen::MatrixXd j = off;
  j.diagonal().setConstant(c);
  SymmetricMatrix result(std::move(j));
  // lambda_min(result) == pd_margin up to rounding, so probe just below it.
  const SymmetricMatrix shifted = result - (pd_margin * (1.0 - 1e-6)) * SymmetricMatrix::identity(p);
  if (!is_positive_definite(shifted))
    throw Error(ErrorCode::GenerationFailed, "diagonal weighting failed to reach the requested PD margin");
  return result;
}

SymmetricMatrix gen_residual(const SymmetricMatrix& j_m, double fraction, double magnitude, Rng& rng) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw Error(ErrorCode::InvalidInput, "fraction must lie in [0, 1]");
  if (!(magnitude > 0.0)) throw Error(ErrorCode::InvalidInput, "residual magnitude must be > 0");
  const int p = j_m.dim();
  std::vector<Edge> edges = support_off(j_m, 0.0).edges();
  const auto count = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(edges.size()) + 0.5));
  // Fisher-Yates: the first `count` slots end up a uniform sample.
  for (std::size_t k = 0; k < count; ++k) {
    const auto pick = k + rng.uniform_index(edges.size() - k);
    std::swap(edges[k], edges[pick]);
  }
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(p, p);
  for (std::size_t k = 0; k < count; ++k) {
    const auto [i, j] = edges[k];
    const double v = j_m(i, j) > 0.0 ? -magnitude : magnitude;
    r(i, j) = v;
    r(j, i) = v;
  }
  return SymmetricMatrix(std::move(r));
}

GroundTruthModel gen_model(const SynthConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const SupportSet graph = grid_graph(config.rows, config.cols);
  const SymmetricMatrix j_m = gen_markov(graph, config.edge_weight_magnitude, config.pd_margin, rng);
  for (int attempt = 0; attempt < kResidualAttempts; ++attempt) {
    const SymmetricMatrix sigma_r = gen_residual(j_m, config.residual_fraction, config.residual_magnitude, rng);
    try {
      GroundTruthModel model = compose(j_m, sigma_r);
      Eigen::VectorXd mean(j_m.dim());
      for (int i = 0; i < j_m.dim(); ++i) mean(i) = rng.uniform01();
      model.mean = std::move(mean);
      return model;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::CompositeNotPD) throw;
    }
  }
  throw Error(ErrorCode::GenerationFailed, "no residual placement gave a positive definite covariance in " +
                                               std::to_string(kResidualAttempts) + " attempts");
}

}  // namespace covdecomp

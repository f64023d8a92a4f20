#include "covdecomp/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "covdecomp/error.hpp"

namespace covdecomp {

SupportSet::SupportSet(int dim, std::vector<Edge> edges) : dim_(dim), edges_(std::move(edges)) {
  for (auto& e : edges_) {
    if (e.i == e.j) throw Error(ErrorCode::InvalidInput, "support pairs must be off-diagonal");
    if (e.i < 0 || e.j < 0 || e.i >= dim || e.j >= dim) throw Error(ErrorCode::IndexOutOfRange, "support pair");
    if (e.i > e.j) std::swap(e.i, e.j);
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
}

bool SupportSet::contains(int a, int b) const {
  Edge e{std::min(a, b), std::max(a, b)};
  return std::binary_search(edges_.begin(), edges_.end(), e);
}

void write_support_csv(const std::filesystem::path& path, const SupportSet& s) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  for (const auto& e : s.edges()) out << e.i + 1 << ',' << e.j + 1 << '\n';
}

SupportSet read_support_csv(const std::filesystem::path& path, int dim) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::vector<Edge> edges;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    int a = 0, b = 0;
    char comma = 0;
    std::istringstream ss(line);
    if (!(ss >> a >> comma >> b) || comma != ',')
      throw Error(ErrorCode::InvalidInput, path.string() + ": bad edge line '" + line + "'");
    edges.push_back({a - 1, b - 1});
  }
  return SupportSet(dim, std::move(edges));
}

namespace {

SupportSet unordered(int dim, const std::vector<OrderedPair>& pairs) {
  std::vector<Edge> edges;
  for (const auto& pr : pairs)
    if (pr.i < pr.j) edges.push_back({pr.i, pr.j});
  return SupportSet(dim, std::move(edges));
}

}  // namespace

SupportSet SupportPartition::residual_edges() const { return unordered(dim, s_r); }
SupportSet SupportPartition::markov_edges() const { return unordered(dim, s_m); }

GroundTruthModel compose(const SymmetricMatrix& j_m, const SymmetricMatrix& sigma_r) {
  if (j_m.dim() != sigma_r.dim()) throw Error(ErrorCode::DimMismatch, "compose: j_m and sigma_r differ in size");
  for (int i = 0; i < sigma_r.dim(); ++i)
    if (sigma_r(i, i) != 0.0) throw Error(ErrorCode::InvalidInput, "residual covariance must have a zero diagonal");
  SymmetricMatrix sigma_m = inverse_spd(j_m);
  SymmetricMatrix sigma = sigma_m + sigma_r;
  if (!is_positive_definite(sigma))
    throw Error(ErrorCode::CompositeNotPD, "j_m^{-1} + sigma_r is not positive definite");
  return GroundTruthModel{j_m, sigma_r, std::move(sigma), elementwise_linf_off(j_m), std::nullopt};
}

double default_support_threshold(const SymmetricMatrix& m) { return 1e-6 * (1.0 + m.max_abs()); }

SupportSet support_off(const SymmetricMatrix& m, double threshold) {
  if (threshold < 0.0) throw Error(ErrorCode::InvalidInput, "support threshold must be >= 0");
  std::vector<Edge> edges;
  for (int i = 0; i < m.dim(); ++i)
    for (int j = i + 1; j < m.dim(); ++j)
      if (std::abs(m(i, j)) > threshold) edges.push_back({i, j});
  return SupportSet(m.dim(), std::move(edges));
}

SupportPartition build_partition(const SymmetricMatrix& j_m, const SymmetricMatrix& sigma_r, double threshold) {
  if (j_m.dim() != sigma_r.dim()) throw Error(ErrorCode::DimMismatch, "build_partition");
  const int p = j_m.dim();
  SupportPartition part;
  part.dim = p;
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      const bool in_m = i == j || std::abs(j_m(i, j)) > threshold;
      const bool in_r = i != j && std::abs(sigma_r(i, j)) > threshold;
      if (in_r && !in_m) {
        throw Error(ErrorCode::SupportViolation, "residual pair (" + std::to_string(i + 1) + "," +
                                                     std::to_string(j + 1) + ") lies outside the Markov support");
      }
      const OrderedPair pr{i, j};
      if (in_m) part.s_m.push_back(pr);
      if (in_r)
        part.s_r.push_back(pr);
      else if (in_m)
        part.s.push_back(pr);
      else
        part.s_m_complement.push_back(pr);
    }
  }
  return part;
}

int max_degree(const SupportSet& support) {
  std::vector<int> degree(static_cast<std::size_t>(support.dim()), 0);
  for (const auto& e : support.edges()) {
    ++degree[static_cast<std::size_t>(e.i)];
    ++degree[static_cast<std::size_t>(e.j)];
  }
  return degree.empty() ? 0 : *std::max_element(degree.begin(), degree.end());
}

Metadata read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  Metadata kv;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::InvalidInput, path.string() + ": expected key=value, got '" + line + "'");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

void write_key_values(const std::filesystem::path& path, const Metadata& kv) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
}

void save_model(const std::filesystem::path& dir, const GroundTruthModel& model, Metadata metadata) {
  std::filesystem::create_directories(dir);
  write_matrix_csv(dir / "j_m.csv", model.j_m);
  write_matrix_csv(dir / "sigma_r.csv", model.sigma_r);
  write_matrix_csv(dir / "sigma.csv", model.sigma);
  if (model.mean) write_dense_csv(dir / "mean.csv", *model.mean);
  std::ostringstream ls;
  ls << std::setprecision(std::numeric_limits<double>::max_digits10) << model.lambda_star;
  metadata["p"] = std::to_string(model.j_m.dim());
  metadata["lambda_star"] = ls.str();
  write_key_values(dir / "metadata.txt", metadata);
}

GroundTruthModel load_model(const std::filesystem::path& dir) {
  GroundTruthModel model = compose(read_matrix_csv(dir / "j_m.csv"), read_matrix_csv(dir / "sigma_r.csv"));
  const SymmetricMatrix stored = read_matrix_csv(dir / "sigma.csv");
  if (stored.dim() != model.sigma.dim() ||
      (stored.dense() - model.sigma.dense()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + model.sigma.max_abs())) {
    throw Error(ErrorCode::InvalidInput, dir.string() + ": sigma.csv does not equal inv(j_m) + sigma_r");
  }
  model.sigma = stored;
  if (std::filesystem::exists(dir / "mean.csv")) {
    Eigen::MatrixXd mu = read_dense_csv(dir / "mean.csv");
    if (mu.cols() != 1 || mu.rows() != model.j_m.dim())
      throw Error(ErrorCode::InvalidInput, dir.string() + ": mean.csv must hold one value per node");
    model.mean = Eigen::VectorXd(mu.col(0));
  }
  return model;
}

}  // namespace covdecomp

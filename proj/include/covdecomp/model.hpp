#pragma once

#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "covdecomp/matrix.hpp"

namespace covdecomp {

/// Unordered node pair, stored canonically with i < j (0-based).
struct Edge {
  int i;
  int j;
  auto operator<=>(const Edge&) const = default;
};

/// Ordered node pair (i, j), i == j allowed (0-based). Sorted
/// lexicographically, which is the row order of Sigma (x) Sigma.
struct OrderedPair {
  int i;
  int j;
  auto operator<=>(const OrderedPair&) const = default;
};

/// Set of off-diagonal node pairs on p nodes.
class SupportSet {
 public:
  explicit SupportSet(int dim) : dim_(dim) {}
  /// Pairs may come in either order; duplicates collapse. Throws
  /// InvalidInput for diagonal or out-of-range pairs.
  SupportSet(int dim, std::vector<Edge> edges);

  int dim() const { return dim_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t size() const { return edges_.size(); }
  bool empty() const { return edges_.empty(); }
  bool contains(int a, int b) const;

  friend bool operator==(const SupportSet&, const SupportSet&) = default;

 private:
  int dim_;
  std::vector<Edge> edges_;
};

/// Edge-list CSV, lines "i,j" with 1-based labels and i < j.
void write_support_csv(const std::filesystem::path& path, const SupportSet& s);
SupportSet read_support_csv(const std::filesystem::path& path, int dim);

/// The partition {S_R, S, S_M^c} of all p^2 ordered pairs, plus S_M.
struct SupportPartition {
  int dim = 0;
  std::vector<OrderedPair> s_m;             // Markov edges (both orders) and the diagonal
  std::vector<OrderedPair> s_r;             // residual support (both orders)
  std::vector<OrderedPair> s;               // s_m minus s_r
  std::vector<OrderedPair> s_m_complement;  // everything outside s_m

  /// Residual edges as unordered pairs.
  SupportSet residual_edges() const;
  /// Markov edges (s_m without the diagonal) as unordered pairs.
  SupportSet markov_edges() const;
};

struct GroundTruthModel {
  SymmetricMatrix j_m;      // Markov precision
  SymmetricMatrix sigma_r;  // residual covariance, zero diagonal
  SymmetricMatrix sigma;    // j_m^{-1} + sigma_r
  double lambda_star = 0.0;
  std::optional<Eigen::VectorXd> mean;  // only used to build LBP potentials
};

struct DecompositionEstimate {
  SymmetricMatrix j_m_hat;
  SymmetricMatrix sigma_m_hat;
  SymmetricMatrix sigma_r_hat;
  int iterations = 0;
  double final_objective = 0.0;
  double kkt_residual = 0.0;
  bool converged = false;
};

/// Builds Sigma = j_m^{-1} + sigma_r. Throws NotPositiveDefinite for a bad
/// j_m, InvalidInput for a residual with nonzero diagonal, CompositeNotPD if
/// the sum is not positive definite.
GroundTruthModel compose(const SymmetricMatrix& j_m, const SymmetricMatrix& sigma_r);

/// 1e-6 * (1 + max |m_ij|): the cutoff used for supports of estimated matrices.
double default_support_threshold(const SymmetricMatrix& m);

/// Off-diagonal pairs with |m_ij| > threshold.
SupportSet support_off(const SymmetricMatrix& m, double threshold);

/// Throws SupportViolation if supp(sigma_r) is not inside supp(j_m).
SupportPartition build_partition(const SymmetricMatrix& j_m, const SymmetricMatrix& sigma_r, double threshold);

/// Largest node degree in `support`.
int max_degree(const SupportSet& support);

/// Model directory: j_m.csv, sigma_r.csv, sigma.csv, optional mean.csv, and
/// metadata.txt with key=value lines.
using Metadata = std::map<std::string, std::string>;
void save_model(const std::filesystem::path& dir, const GroundTruthModel& model, Metadata metadata = {});
/// Recomposes from j_m.csv and sigma_r.csv and checks sigma.csv against it.
GroundTruthModel load_model(const std::filesystem::path& dir);

Metadata read_key_values(const std::filesystem::path& path);
void write_key_values(const std::filesystem::path& path, const Metadata& kv);

}  // namespace covdecomp

#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <initializer_list>
#include <optional>
#include <span>

namespace covdecomp {

/// Dense real symmetric p x p matrix. Symmetry is checked on construction
/// and the stored entries are exactly symmetric afterwards. Indices are
/// 0-based in code; file formats and edge lists use 1-based node labels.
class SymmetricMatrix {
 public:
  /// Throws InvalidInput if `m` is not square, is empty, or differs from its
  /// transpose by more than `tol` (relative to the largest entry).
  explicit SymmetricMatrix(Eigen::MatrixXd m, double tol = 1e-9);
  SymmetricMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static SymmetricMatrix zero(int p);
  static SymmetricMatrix identity(int p);
  static SymmetricMatrix diagonal(std::span<const double> d);
  static SymmetricMatrix diagonal(std::initializer_list<double> d);

  int dim() const { return static_cast<int>(m_.rows()); }
  double operator()(int i, int j) const { return m_(i, j); }
  const Eigen::MatrixXd& dense() const { return m_; }

  /// Copy with entries (i,j) and (j,i) set to `v`.
  SymmetricMatrix with_entry(int i, int j, double v) const;

  /// Largest absolute entry, diagonal included.
  double max_abs() const { return m_.cwiseAbs().maxCoeff(); }

  friend SymmetricMatrix operator+(const SymmetricMatrix& a, const SymmetricMatrix& b);
  friend SymmetricMatrix operator-(const SymmetricMatrix& a, const SymmetricMatrix& b);
  friend SymmetricMatrix operator*(double s, const SymmetricMatrix& a);
  friend bool operator==(const SymmetricMatrix& a, const SymmetricMatrix& b) { return a.m_ == b.m_; }

 private:
  struct Trusted {};
  SymmetricMatrix(Trusted, Eigen::MatrixXd m) : m_(std::move(m)) {}

  Eigen::MatrixXd m_;
};

/// Pivots at or below this value mean "not positive definite".
inline constexpr double kPivotTolerance = 1e-12;

/// Lower Cholesky factor of an SPD matrix.
class CholeskyFactor {
 public:
  /// Factor `m` (only the lower triangle is read). std::nullopt when a pivot
  /// is <= kPivotTolerance. Used in hot loops where failure is expected.
  static std::optional<CholeskyFactor> try_factor(const Eigen::MatrixXd& m);

  const Eigen::MatrixXd& lower() const { return lower_; }

  /// log det m = 2 * sum log L_ii
  double log_det() const;

  /// m^{-1}, symmetrized.
  Eigen::MatrixXd inverse() const;

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

 private:
  explicit CholeskyFactor(Eigen::MatrixXd lower) : lower_(std::move(lower)) {}
  Eigen::MatrixXd lower_;
};

/// L with m = L L^T. Throws NotPositiveDefinite.
Eigen::MatrixXd cholesky(const SymmetricMatrix& m);

/// Throws NotPositiveDefinite.
SymmetricMatrix inverse_spd(const SymmetricMatrix& m);

bool is_positive_definite(const SymmetricMatrix& m);

/// max_{i != j} |m_ij|, and 0 for 1 x 1 matrices.
double elementwise_linf_off(const SymmetricMatrix& m);

/// Maximum absolute row sum.
double linf_operator_norm(const Eigen::MatrixXd& m);
inline double linf_operator_norm(const SymmetricMatrix& m) { return linf_operator_norm(m.dense()); }

/// Maximum absolute column sum.
double l1_operator_norm(const Eigen::MatrixXd& m);

/// Largest |eigenvalue| of a symmetric matrix by power iteration.
///
/// The estimate is ||M v_k|| for the normalized iterate v_k, which converges
/// to the spectral radius even when +rho and -rho are both eigenvalues and
/// the direction itself oscillates. The start vector is all-ones; matrices
/// with negative entries get a second deterministic start so that an
/// all-ones vector orthogonal to the dominant eigenspace cannot hide it.
/// Throws NoConvergence after `max_iterations` without meeting
/// |rho_k - rho_{k-1}| <= tol * (1 + rho_k).
double spectral_radius(const SymmetricMatrix& m, double tol = 1e-12, int max_iterations = 10000);

/// Matrix CSV: one row per line, comma-separated, no header.
Eigen::MatrixXd read_dense_csv(const std::filesystem::path& path);
void write_dense_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m);

/// Loads a square CSV; asymmetry beyond 1e-9 is an InvalidInput error.
SymmetricMatrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path, const SymmetricMatrix& m);

}  // namespace covdecomp

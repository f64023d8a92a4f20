#include "covdecomp/matrix.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "covdecomp/error.hpp"

namespace covdecomp {

SymmetricMatrix::SymmetricMatrix(Eigen::MatrixXd m, double tol) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw Error(ErrorCode::InvalidInput, "symmetric matrix must be square and non-empty, got " +
                                             std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  if (!m.allFinite()) throw Error(ErrorCode::InvalidInput, "matrix has non-finite entries");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > tol * scale) {
    std::ostringstream os;
    os << "matrix is not symmetric (max |m_ij - m_ji| = " << asym << ")";
    throw Error(ErrorCode::InvalidInput, os.str());
  }
  m_ = 0.5 * (m + m.transpose());
}

SymmetricMatrix::SymmetricMatrix(std::initializer_list<std::initializer_list<double>> rows) {
  const auto p = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd m(p, p);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    if (static_cast<Eigen::Index>(row.size()) != p) throw Error(ErrorCode::InvalidInput, "ragged matrix literal");
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  *this = SymmetricMatrix(std::move(m));
}

SymmetricMatrix SymmetricMatrix::zero(int p) {
  if (p < 1) throw Error(ErrorCode::InvalidInput, "dimension must be >= 1");
  return SymmetricMatrix(Trusted{}, Eigen::MatrixXd::Zero(p, p));
}

SymmetricMatrix SymmetricMatrix::identity(int p) {
  if (p < 1) throw Error(ErrorCode::InvalidInput, "dimension must be >= 1");
  return SymmetricMatrix(Trusted{}, Eigen::MatrixXd::Identity(p, p));
}

SymmetricMatrix SymmetricMatrix::diagonal(std::span<const double> d) {
  if (d.empty()) throw Error(ErrorCode::InvalidInput, "dimension must be >= 1");
  const auto p = static_cast<Eigen::Index>(d.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i) m(i, i) = d[static_cast<std::size_t>(i)];
  return SymmetricMatrix(std::move(m));
}

SymmetricMatrix SymmetricMatrix::diagonal(std::initializer_list<double> d) {
  return diagonal(std::span<const double>(d.begin(), d.size()));
}

SymmetricMatrix SymmetricMatrix::with_entry(int i, int j, double v) const {
  if (i < 0 || j < 0 || i >= dim() || j >= dim()) throw Error(ErrorCode::IndexOutOfRange, "with_entry");
  Eigen::MatrixXd m = m_;
  m(i, j) = v;
  m(j, i) = v;
  return SymmetricMatrix(Trusted{}, std::move(m));
}

SymmetricMatrix operator+(const SymmetricMatrix& a, const SymmetricMatrix& b) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::DimMismatch, "matrix sum");
  return SymmetricMatrix(SymmetricMatrix::Trusted{}, a.m_ + b.m_);
}

SymmetricMatrix operator-(const SymmetricMatrix& a, const SymmetricMatrix& b) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::DimMismatch, "matrix difference");
  return SymmetricMatrix(SymmetricMatrix::Trusted{}, a.m_ - b.m_);
}

SymmetricMatrix operator*(double s, const SymmetricMatrix& a) {
  return SymmetricMatrix(SymmetricMatrix::Trusted{}, s * a.m_);
}

std::optional<CholeskyFactor> CholeskyFactor::try_factor(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt(m);
  if (llt.info() != Eigen::Success) return std::nullopt;
  Eigen::MatrixXd lower = llt.matrixL();
  // LLT only rejects pivots <= 0; tighten to the numerical PD cutoff.
  for (Eigen::Index i = 0; i < lower.rows(); ++i) {
    const double pivot = lower(i, i) * lower(i, i);
    if (!(pivot > kPivotTolerance)) return std::nullopt;
  }
  return CholeskyFactor(std::move(lower));
}

double CholeskyFactor::log_det() const { return 2.0 * lower_.diagonal().array().log().sum(); }

Eigen::MatrixXd CholeskyFactor::inverse() const {
  const auto p = lower_.rows();
  Eigen::MatrixXd linv = Eigen::MatrixXd::Identity(p, p);
  lower_.triangularView<Eigen::Lower>().solveInPlace(linv);
  Eigen::MatrixXd inv = linv.transpose() * linv;
  return 0.5 * (inv + inv.transpose());
}

Eigen::VectorXd CholeskyFactor::solve(const Eigen::VectorXd& rhs) const {
  Eigen::VectorXd y = lower_.triangularView<Eigen::Lower>().solve(rhs);
  return lower_.transpose().triangularView<Eigen::Upper>().solve(y);
}

Eigen::MatrixXd cholesky(const SymmetricMatrix& m) {
  auto f = CholeskyFactor::try_factor(m.dense());
  if (!f) throw Error(ErrorCode::NotPositiveDefinite, "Cholesky pivot <= 1e-12");
  return f->lower();
}

SymmetricMatrix inverse_spd(const SymmetricMatrix& m) {
  auto f = CholeskyFactor::try_factor(m.dense());
  if (!f) throw Error(ErrorCode::NotPositiveDefinite, "cannot invert a matrix that is not positive definite");
  return SymmetricMatrix(f->inverse());
}

bool is_positive_definite(const SymmetricMatrix& m) { return CholeskyFactor::try_factor(m.dense()).has_value(); }

double elementwise_linf_off(const SymmetricMatrix& m) {
  double best = 0.0;
  for (int j = 0; j < m.dim(); ++j)
    for (int i = j + 1; i < m.dim(); ++i) best = std::max(best, std::abs(m(i, j)));
  return best;
}

double linf_operator_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

double l1_operator_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().colwise().sum().maxCoeff();
}

namespace {

// Power iteration whose estimate is the largest |Ritz value| on span{v, Mv}.
// A plain ||Mv|| estimate stalls when the spectrum has a near pair +-rho
// (nearly bipartite supports); the two-dimensional extraction resolves the
// pair exactly, so convergence depends on the third eigenvalue instead.
std::optional<double> power_iterate(const Eigen::MatrixXd& m, Eigen::VectorXd v, double tol, int max_iterations) {
  v.normalize();
  double previous = -1.0;
  for (int k = 0; k < max_iterations; ++k) {
    const Eigen::VectorXd w = m * v;
    const double norm_w = w.norm();
    if (norm_w == 0.0) return 0.0;
    const double a = v.dot(w);
    Eigen::VectorXd u = w - a * v;
    const double norm_u = u.norm();
    double estimate = std::abs(a);
    if (norm_u > 1e-14 * norm_w) {
      u /= norm_u;
      const double c = u.dot(m * u);
      // Ritz matrix [[a, norm_u], [norm_u, c]]
      const double mid = 0.5 * (a + c);
      const double rad = std::hypot(0.5 * (a - c), norm_u);
      estimate = std::max(std::abs(mid + rad), std::abs(mid - rad));
    }
    if (std::abs(estimate - previous) <= tol * (1.0 + estimate)) return estimate;
    previous = estimate;
    v = w / norm_w;
  }
  return std::nullopt;
}

}  // namespace

double spectral_radius(const SymmetricMatrix& m, double tol, int max_iterations) {
  const int p = m.dim();
  auto rho = power_iterate(m.dense(), Eigen::VectorXd::Ones(p), tol, max_iterations);
  if (!rho) throw Error(ErrorCode::NoConvergence, "power iteration did not reach tolerance");
  if ((m.dense().array() < 0.0).any() && p > 1) {
    Eigen::VectorXd alt(p);
    for (int i = 0; i < p; ++i) alt(i) = (i % 2 == 0 ? 1.0 : -1.0) * (1.0 + static_cast<double>(i) / p);
    auto rho2 = power_iterate(m.dense(), alt, tol, max_iterations);
    if (!rho2) throw Error(ErrorCode::NoConvergence, "power iteration did not reach tolerance");
    rho = std::max(*rho, *rho2);
  }
  return *rho;
}

Eigen::MatrixXd read_dense_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidInput, path.string() + ": bad number '" + cell + "'");
      }
      if (cell.find_first_not_of(" \t", used) != std::string::npos)
        throw Error(ErrorCode::InvalidInput, path.string() + ": bad number '" + cell + "'");
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw Error(ErrorCode::InvalidInput, path.string() + ": ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::InvalidInput, path.string() + ": empty matrix file");
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

void write_dense_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << m(i, j);
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

SymmetricMatrix read_matrix_csv(const std::filesystem::path& path) {
  Eigen::MatrixXd m = read_dense_csv(path);
  if (m.rows() != m.cols()) throw Error(ErrorCode::InvalidInput, path.string() + ": matrix is not square");
  return SymmetricMatrix(std::move(m), 1e-9);
}

void write_matrix_csv(const std::filesystem::path& path, const SymmetricMatrix& m) { write_dense_csv(path, m.dense()); }

}  // namespace covdecomp

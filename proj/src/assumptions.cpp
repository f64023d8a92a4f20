#include "covdecomp/assumptions.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "covdecomp/error.hpp"

namespace covdecomp {

namespace {

constexpr double kMaxCondition = 1e12;
constexpr long kMaxM = 1000000;

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

const char* verdict(bool ok) { return ok ? "PASS" : "FAIL"; }

}  // namespace

std::string AssumptionReport::to_text() const {
  std::ostringstream os;
  os.precision(10);
  os << "a0_pd=" << a0_pd << '\n'
     << "a1_lambda_star=" << a1_lambda_star << '\n'
     << "a2_diag_ok=" << a2_diag_ok << '\n'
     << "a2_forward_ok=" << a2_forward_ok << '\n'
     << "a2_reverse_ok=" << a2_reverse_ok << '\n'
     << "a2_support_ok=" << a2_support_ok << '\n'
     << "a3_signs_ok=" << a3_signs_ok << '\n'
     << "a4_incoherence_lhs=" << a4_incoherence_lhs << '\n'
     << "a4_alpha=" << (a4_alpha ? std::to_string(*a4_alpha) : std::string("none")) << '\n'
     << "a4_k_ssr=" << a4_k_ssr << '\n'
     << "a5_k_ss=" << a5_k_ss << '\n'
     << "a5_m_feasible=" << (a5_m_feasible ? std::to_string(*a5_m_feasible) : std::string("none")) << '\n'
     << "k_m=" << k_m << '\n'
     << "degree=" << degree << '\n'
     << "j_min=" << j_min << '\n'
     << "sigma_r_min=" << sigma_r_min << '\n'
     << "A.0 " << verdict(a0_pd) << '\n'
     << "A.1 PASS\n"
     << "A.2 " << verdict(a2_support_ok) << '\n'
     << "A.3 " << verdict(a3_signs_ok) << '\n'
     << "A.4 " << verdict(incoherence_ok()) << '\n'
     << "A.5 " << verdict(covariance_control_ok()) << '\n';
  return os.str();
}

AssumptionReport check_exact(const SymmetricMatrix& j_m, const SymmetricMatrix& sigma_r, const CheckOptions& options) {
  if (j_m.dim() != sigma_r.dim()) throw Error(ErrorCode::DimMismatch, "check_exact");
  const int p = j_m.dim();
  AssumptionReport rep;
  rep.a0_pd = is_positive_definite(j_m);
  rep.a1_lambda_star = lambda_star(j_m);
  const double lam = rep.a1_lambda_star;
  const double eq_tol = options.tol * std::max(1.0, lam);

  rep.a2_diag_ok = true;
  for (int i = 0; i < p; ++i) rep.a2_diag_ok = rep.a2_diag_ok && sigma_r(i, i) == 0.0;

  rep.a2_forward_ok = true;
  rep.a2_reverse_ok = true;
  rep.a3_signs_ok = true;
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) {
      const bool residual = std::abs(sigma_r(i, j)) > options.tol;
      const bool maximal = lam > 0.0 && std::abs(std::abs(j_m(i, j)) - lam) <= eq_tol;
      if (residual && !maximal) rep.a2_forward_ok = false;
      if (maximal && !residual) rep.a2_reverse_ok = false;
      if (sign(sigma_r(i, j)) * sign(j_m(i, j)) > 0.0) rep.a3_signs_ok = false;
    }
  }
  rep.a2_support_ok = rep.a2_diag_ok && rep.a2_forward_ok && (!options.strict_support || rep.a2_reverse_ok);
  return rep;
}

Eigen::MatrixXd hessian_submatrix(const SymmetricMatrix& sigma_m, std::span<const OrderedPair> rows,
                                  std::span<const OrderedPair> cols) {
  const int p = sigma_m.dim();
  auto check = [p](const OrderedPair& pr) {
    if (pr.i < 0 || pr.j < 0 || pr.i >= p || pr.j >= p)
      throw Error(ErrorCode::IndexOutOfRange, "pair (" + std::to_string(pr.i + 1) + "," + std::to_string(pr.j + 1) +
                                                  ") outside 1.." + std::to_string(p));
  };
  for (const auto& r : rows) check(r);
  for (const auto& c : cols) check(c);
  const auto nr = static_cast<Eigen::Index>(rows.size());
  const auto nc = static_cast<Eigen::Index>(cols.size());
  Eigen::MatrixXd out(nr, nc);
  const Eigen::MatrixXd& s = sigma_m.dense();
  for (Eigen::Index b = 0; b < nc; ++b) {
    const auto [k, l] = cols[static_cast<std::size_t>(b)];
    for (Eigen::Index a = 0; a < nr; ++a) {
      const auto [i, j] = rows[static_cast<std::size_t>(a)];
      out(a, b) = s(i, k) * s(j, l);
    }
  }
  return out;
}

std::optional<long> covariance_control_m(double k_ss, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) return std::nullopt;
  // The bound grows monotonically in m, so the first hit is the smallest.
  auto bound = [alpha](long m) {
    const double md = static_cast<double>(m);
    return (md - 4.0) * alpha / (4.0 * (md - (md - 1.0) * alpha));
  };
  if (k_ss > bound(kMaxM)) return std::nullopt;
  long lo = 5, hi = kMaxM;
  while (lo < hi) {
    const long mid = lo + (hi - lo) / 2;
    if (k_ss <= bound(mid))
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

void incoherence(const SymmetricMatrix& sigma_m, const SupportPartition& partition, AssumptionReport& report) {
  if (partition.dim != sigma_m.dim()) throw Error(ErrorCode::DimMismatch, "incoherence");
  if (partition.s.empty()) throw Error(ErrorCode::InvalidInput, "partition set S is empty");

  const Eigen::MatrixXd g_ss = hessian_submatrix(sigma_m, partition.s, partition.s);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g_ss, Eigen::EigenvaluesOnly);
  const double ev_min = eig.eigenvalues().minCoeff();
  const double ev_max = eig.eigenvalues().maxCoeff();
  if (!(ev_min > 0.0) || ev_max / ev_min > kMaxCondition)
    throw Error(ErrorCode::SingularGamma, "Gamma_SS is singular or too ill-conditioned to invert");
  auto factor = CholeskyFactor::try_factor(g_ss);
  if (!factor) throw Error(ErrorCode::SingularGamma, "Gamma_SS is not positive definite");
  const Eigen::MatrixXd g_ss_inv = factor->inverse();

  double lhs1 = 0.0, lhs2 = 0.0, k_ssr = 0.0;
  const bool has_r = !partition.s_r.empty();
  const bool has_c = !partition.s_m_complement.empty();
  Eigen::MatrixXd g_s_sr;
  if (has_r) {
    g_s_sr = hessian_submatrix(sigma_m, partition.s, partition.s_r);
    k_ssr = linf_operator_norm(Eigen::MatrixXd(g_ss_inv * g_s_sr));
  }
  if (has_c) {
    const Eigen::MatrixXd g_c_s = hessian_submatrix(sigma_m, partition.s_m_complement, partition.s);
    const Eigen::MatrixXd a = g_c_s * g_ss_inv;
    lhs2 = linf_operator_norm(a);
    if (has_r) {
      const Eigen::MatrixXd g_c_sr = hessian_submatrix(sigma_m, partition.s_m_complement, partition.s_r);
      lhs1 = linf_operator_norm(Eigen::MatrixXd(a * g_s_sr - g_c_sr));
    }
  }

  report.a4_incoherence_lhs = std::max(lhs1, lhs2);
  report.a4_alpha = report.a4_incoherence_lhs < 1.0 ? std::optional<double>(1.0 - report.a4_incoherence_lhs)
                                                    : std::nullopt;
  report.a4_k_ssr = k_ssr;
  report.a5_k_ss = linf_operator_norm(g_ss);
  report.a5_m_feasible = report.a4_alpha ? covariance_control_m(report.a5_k_ss, *report.a4_alpha) : std::nullopt;
  report.k_m = linf_operator_norm(sigma_m);
}

AssumptionReport check_all(const GroundTruthModel& model, const CheckOptions& options) {
  AssumptionReport rep = check_exact(model.j_m, model.sigma_r, options);
  if (!rep.a0_pd) return rep;
  const SymmetricMatrix sigma_m = inverse_spd(model.j_m);
  rep.k_m = linf_operator_norm(sigma_m);

  const SupportSet markov = support_off(model.j_m, 0.0);
  const SupportSet residual = support_off(model.sigma_r, 0.0);
  rep.degree = max_degree(markov);
  rep.j_min = 0.0;
  if (!markov.empty()) {
    rep.j_min = std::numeric_limits<double>::infinity();
    for (const auto& e : markov.edges()) rep.j_min = std::min(rep.j_min, std::abs(model.j_m(e.i, e.j)));
  }
  rep.sigma_r_min = 0.0;
  if (!residual.empty()) {
    rep.sigma_r_min = std::numeric_limits<double>::infinity();
    for (const auto& e : residual.edges()) rep.sigma_r_min = std::min(rep.sigma_r_min, std::abs(model.sigma_r(e.i, e.j)));
  }

  try {
    const SupportPartition part = build_partition(model.j_m, model.sigma_r, 0.0);
    incoherence(sigma_m, part, rep);
  } catch (const Error& e) {
    // A residual outside the Markov support already fails A.2; the
    // partition-based quantities are then undefined and left at zero.
    if (e.code() != ErrorCode::SupportViolation) throw;
  }
  return rep;
}

}  // namespace covdecomp

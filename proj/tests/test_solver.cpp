#include <doctest.h>

#include <cmath>

#include "covdecomp/error.hpp"
#include "covdecomp/model.hpp"
#include "covdecomp/sampling.hpp"
#include "covdecomp/solver.hpp"
#include "covdecomp/synth.hpp"
#include "support.hpp"

using namespace covdecomp;

namespace {

const SymmetricMatrix kSigma2{{4.0 / 3, -23.0 / 30}, {-23.0 / 30, 4.0 / 3}};

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::Io;
}

SolverOptions opts(double gamma, double lambda) {
  SolverOptions o;
  o.gamma = gamma;
  o.lambda = lambda;
  return o;
}

}  // namespace

TEST_CASE("regularization_schedule examples") {
  const auto r = regularization_schedule(64, 4096, ScheduleConfig{1.0, 1.0, 0.5});
  CHECK(r.gamma == doctest::Approx(0.031864).epsilon(1e-5));
  CHECK(r.lambda == doctest::Approx(0.531864).epsilon(1e-6));
  const auto big = regularization_schedule(64, 1'000'000'000, ScheduleConfig{1.0, 1.0, 0.5});
  CHECK(big.gamma < 1e-4);
  CHECK(big.lambda - 0.5 < 1e-4);
  CHECK(code_of([] { regularization_schedule(1, 10, {}); }) == ErrorCode::InvalidInput);
  CHECK(code_of([] { regularization_schedule(4, 0, {}); }) == ErrorCode::InvalidInput);
  CHECK(code_of([] { regularization_schedule(4, 10, ScheduleConfig{0.0, 1.0, 0.0}); }) == ErrorCode::InvalidInput);
}

TEST_CASE("objective examples") {
  CHECK(objective(SymmetricMatrix::identity(5), SymmetricMatrix::identity(5), 3.0) == doctest::Approx(5.0));
  CHECK(objective(SymmetricMatrix{{2.0}}, SymmetricMatrix{{0.5}}, 0.0) == doctest::Approx(1.693147).epsilon(1e-6));
  // <S, J> = 8/3 - 23/30, log det J = ln 0.75
  const double direct = 8.0 / 3 - 23.0 / 30 - std::log(0.75);
  CHECK(direct == doctest::Approx(2.187682).epsilon(1e-6));
  CHECK(objective(kSigma2, SymmetricMatrix{{1, 0.5}, {0.5, 1}}, 0.0) == doctest::Approx(direct).epsilon(1e-12));
  CHECK(objective(kSigma2, SymmetricMatrix{{1, 0.5}, {0.5, 1}}, 0.1) == doctest::Approx(direct + 0.1).epsilon(1e-12));
  CHECK(code_of([] { objective(kSigma2, SymmetricMatrix{{1, 2}, {2, 1}}, 0.0); }) == ErrorCode::NotPositiveDefinite);
}

TEST_CASE("prox_l1_box examples") {
  CHECK(prox_l1_box(0.8, 0.2, 0.5) == 0.5);
  CHECK(prox_l1_box(-0.3, 0.4, 10.0) == 0.0);
  CHECK(prox_l1_box(-0.3, 0.4, kInfinity) == 0.0);
  CHECK(prox_l1_box(0.3, 0.1, kInfinity) == doctest::Approx(0.2));
  CHECK(prox_l1_box(-0.8, 0.2, 0.5) == -0.5);
}

TEST_CASE("property: prox is the minimizer of its scalar problem") {
  Rng rng(31);
  for (int t = 0; t < 200; ++t) {
    const double v = 4 * (rng.uniform01() - 0.5);
    const double g = rng.uniform01();
    const double l = 0.05 + rng.uniform01();
    const double x = prox_l1_box(v, g, l);
    auto f = [&](double y) { return 0.5 * (y - v) * (y - v) + g * std::abs(y); };
    CHECK(std::abs(x) <= l);
    for (int k = 0; k <= 400; ++k) {
      const double y = -l + 2 * l * k / 400.0;
      CHECK(f(x) <= f(y) + 1e-12);
    }
  }
}

TEST_CASE("solve_primal examples") {
  const auto id = solve_primal(SymmetricMatrix::identity(4), opts(0, kInfinity));
  CHECK(id.kkt.converged);
  CHECK((id.j_m_hat.dense() - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-10);

  const auto d = solve_primal(SymmetricMatrix::diagonal({2, 4, 0.5}), opts(0.3, 0.2));
  CHECK(d.j_m_hat(0, 0) == doctest::Approx(0.5));
  CHECK(d.j_m_hat(1, 1) == doctest::Approx(0.25));
  CHECK(d.j_m_hat(2, 2) == doctest::Approx(2.0));
  CHECK(elementwise_linf_off(d.j_m_hat) == 0.0);

  const auto two = solve_primal(kSigma2, opts(0, 0.5));
  CHECK(two.kkt.converged);
  const Eigen::MatrixXd want = (Eigen::MatrixXd(2, 2) << 1, 0.5, 0.5, 1).finished();
  CHECK((two.j_m_hat.dense() - want).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("solve_primal input validation") {
  CHECK(code_of([] { solve_primal(SymmetricMatrix{{1, 0}, {0, 0}}, opts(0.1, 1)); }) == ErrorCode::InvalidInput);
  CHECK(code_of([] { solve_primal(SymmetricMatrix{{1, 2}, {2, 1}}, opts(0, 1)); }) ==
        ErrorCode::NotPositiveDefinite);
  CHECK(code_of([] { solve_primal(SymmetricMatrix::identity(2), opts(-1, 1)); }) == ErrorCode::InvalidInput);
  CHECK(code_of([] { solve_primal(SymmetricMatrix::identity(2), opts(0, 0)); }) == ErrorCode::InvalidInput);
}

TEST_CASE("singular sample covariance is accepted when gamma > 0") {
  Rng rng(32);
  SynthConfig cfg;
  cfg.rows = cfg.cols = 3;
  const auto model = gen_model(cfg);
  const auto s = sample_covariance(sample_gaussian(model.sigma, 5, rng));  // n < p
  CHECK_FALSE(is_positive_definite(s));
  const auto sol = solve_primal(s, opts(0.2, 1.0));
  CHECK(sol.kkt.converged);
  CHECK(is_positive_definite(sol.j_m_hat));
}

TEST_CASE("iteration cap returns a flagged iterate") {
  SynthConfig cfg;
  const auto model = gen_model(cfg);
  SolverOptions o = opts(0, model.lambda_star);
  o.max_iterations = 3;
  const auto sol = solve_primal(model.sigma, o);
  CHECK_FALSE(sol.kkt.converged);
  CHECK(sol.iterations == 3);
  CHECK(is_positive_definite(sol.j_m_hat));
  CHECK(elementwise_linf_off(sol.j_m_hat) <= model.lambda_star + 1e-12);
}

TEST_CASE("recover_dual examples") {
  const auto two = solve_primal(kSigma2, opts(0, 0.5));
  const auto r = recover_dual(kSigma2, two.j_m_hat, opts(0, 0.5));
  CHECK(r(0, 1) == doctest::Approx(-0.1).epsilon(1e-6));
  CHECK(r(0, 0) == 0.0);

  // Inactive box: nothing recovered.
  const auto loose = solve_primal(kSigma2, opts(0, 5.0));
  CHECK(recover_dual(kSigma2, loose.j_m_hat, opts(0, 5.0)) == SymmetricMatrix::zero(2));
  const auto inf = solve_primal(kSigma2, opts(0.05, kInfinity));
  CHECK(recover_dual(kSigma2, inf.j_m_hat, opts(0.05, kInfinity)) == SymmetricMatrix::zero(2));

  // A J that is nowhere near optimal cannot be certified.
  CHECK(code_of([] { recover_dual(kSigma2, SymmetricMatrix::identity(2), opts(0, 0.5)); }) ==
        ErrorCode::DualInfeasible);
}

TEST_CASE("decompose_exact examples") {
  const auto e = decompose_exact(kSigma2, 0.5);
  CHECK(e.converged);
  CHECK(std::abs(e.j_m_hat(0, 1) - 0.5) < 1e-6);
  CHECK(std::abs(e.sigma_r_hat(0, 1) + 0.1) < 1e-6);
  CHECK((e.sigma_m_hat.dense() * e.j_m_hat.dense() - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-6);

  const auto diag = decompose_exact(SymmetricMatrix::diagonal({2, 3, 5}), 0.1);
  CHECK((diag.j_m_hat.dense() - inverse_spd(SymmetricMatrix::diagonal({2, 3, 5})).dense()).cwiseAbs().maxCoeff() <
        1e-10);
  CHECK(diag.sigma_r_hat == SymmetricMatrix::zero(3));

  Rng rng(33);
  const auto s = testing::random_spd(5, rng);
  const auto inv = inverse_spd(s);
  const auto big = decompose_exact(s, elementwise_linf_off(inv) + 0.01);
  CHECK((big.j_m_hat.dense() - inv.dense()).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(big.sigma_r_hat == SymmetricMatrix::zero(5));
}

TEST_CASE("kkt_residual examples") {
  Rng rng(34);
  const auto s = testing::random_spd(4, rng);
  const auto zero = kkt_residual(s, inverse_spd(s), SymmetricMatrix::zero(4), opts(0, kInfinity));
  CHECK(zero.stationarity_residual < 1e-12);
  CHECK(zero.dual_feasibility_residual < 1e-12);
  CHECK(zero.box_violation == 0.0);

  const SymmetricMatrix j{{1, 0.5}, {0.5, 1}};
  const SymmetricMatrix r{{0, -0.1}, {-0.1, 0}};
  const auto exact = kkt_residual(kSigma2, j, r, opts(0, 0.5));
  CHECK(exact.stationarity_residual <= 1e-8);
  CHECK(exact.dual_feasibility_residual <= 1e-8);

  const auto bumped = kkt_residual(kSigma2, j.with_entry(0, 0, 1.1), r, opts(0, 0.5));
  CHECK(bumped.stationarity_residual > 1e-3);
  CHECK(kkt_residual(kSigma2, j, r, opts(0, 0.4)).box_violation == doctest::Approx(0.1));
}

TEST_CASE("property: analytic gradient matches central differences") {
  Rng rng(35);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = testing::random_spd(4, rng);
    const auto j = testing::random_spd(4, rng);
    const Eigen::MatrixXd g = s.dense() - inverse_spd(j).dense();
    const double h = 1e-5;
    for (int a = 0; a < 4; ++a) {
      for (int b = a; b < 4; ++b) {
        Eigen::MatrixXd e = Eigen::MatrixXd::Zero(4, 4);
        e(a, b) = e(b, a) = 1.0;
        const double fd = (objective(s, SymmetricMatrix(j.dense() + h * e), 0.0) -
                           objective(s, SymmetricMatrix(j.dense() - h * e), 0.0)) /
                          (2 * h);
        const double analytic = (a == b ? 1.0 : 2.0) * g(a, b);
        CHECK(std::abs(fd - analytic) <= 1e-5 * std::max(1.0, std::abs(analytic)));
      }
    }
  }
}

TEST_CASE("property: converged runs carry certificates and descend monotonically") {
  Rng rng(36);
  for (int trial = 0; trial < 25; ++trial) {
    const int p = 2 + static_cast<int>(rng.uniform_index(7));
    const auto s = testing::random_spd(p, rng, 0.3, 2.0);
    SolverOptions o = opts(0.3 * rng.uniform01(), 0.05 + 0.5 * rng.uniform01());
    o.record_objective = true;
    const auto sol = solve_primal(s, o);
    REQUIRE(sol.kkt.converged);
    CHECK(sol.kkt.stationarity_residual <= 1e-8);
    CHECK(elementwise_linf_off(sol.j_m_hat) <= o.lambda + 1e-9);
    for (std::size_t k = 1; k < sol.objective_history.size(); ++k)
      CHECK(sol.objective_history[k] <= sol.objective_history[k - 1] + 1e-12 * (1 + std::abs(sol.objective_history[k - 1])));
    const auto r = recover_dual(s, sol.j_m_hat, o);
    const auto rep = kkt_residual(s, sol.j_m_hat, r, o);
    CHECK(rep.dual_feasibility_residual <= o.active_tol);
    for (int i = 0; i < p; ++i) CHECK(r(i, i) == 0.0);
    for (int a = 0; a < p; ++a)
      for (int b = 0; b < a; ++b)
        if (r(a, b) != 0.0) CHECK(r(a, b) * sol.j_m_hat(a, b) <= 0.0);
  }
}

TEST_CASE("property: lambda endpoints") {
  Rng rng(37);
  for (int trial = 0; trial < 10; ++trial) {
    const int p = 2 + static_cast<int>(rng.uniform_index(6));
    const auto s = testing::random_spd(p, rng);
    const auto mle = decompose(s, opts(0, kInfinity));
    CHECK((mle.j_m_hat.dense() - inverse_spd(s).dense()).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(mle.sigma_r_hat == SymmetricMatrix::zero(p));

    const auto tiny = solve_primal(s, opts(0, 1e-6));
    CHECK(tiny.kkt.converged);
    CHECK(elementwise_linf_off(tiny.j_m_hat) <= 1e-6 + 1e-12);
  }
}

TEST_CASE("solver is deterministic") {
  Rng rng(38);
  const auto s = testing::random_spd(6, rng);
  const auto a = solve_primal(s, opts(0.1, 0.2));
  const auto b = solve_primal(s, opts(0.1, 0.2));
  CHECK(a.j_m_hat == b.j_m_hat);
  CHECK(a.iterations == b.iterations);
}

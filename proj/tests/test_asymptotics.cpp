#include <cmath>

#include "doctest.h"
#include "mcml/asymptotics.hpp"
#include "mcml/autologistic.hpp"
#include "mcml/experiments.hpp"
#include "mcml/oracle.hpp"
#include "test_util.hpp"

using namespace mcml;

namespace {

double frobenius_rel(const Eigen::MatrixXd& est, const Eigen::MatrixXd& ref) {
  return (est - ref).norm() / ref.norm();
}

// d = 3 correctly specified fixture: data simulated at theta0 with a single
// fixed covariate value shared by all observations
struct LargeFixture {
  ModelFamily model;
  Eigen::VectorXd theta0;
  Eigen::VectorXd x;
  Dataset data;
  MonteCarloChain chain;
};

LargeFixture make_large_fixture(int n, int m) {
  AutologisticSpec aspec{3, 0};
  LargeFixture f{build_autologistic(aspec), {}, Eigen::VectorXd(0), {}, {}};
  f.theta0.resize(f.model.param_dim);
  f.theta0 << 0.4, -0.3, 0.2, 0.3, -0.2, 0.1;

  ExperimentConfig cfg;
  cfg.spec = aspec;
  cfg.theta0 = f.theta0;
  cfg.cov_gen = CovariateGenerator::Fixed;
  cfg.fixed_covariates = Eigen::MatrixXd(1, 0);
  cfg.n = n;
  f.data = simulate_dataset(cfg, 71);

  SamplerSpec sspec;
  sspec.reference_param = f.theta0;
  sspec.reference_covariate = f.x;
  sspec.seed = 72;
  f.chain = run_chain(f.model, sspec, m);
  return f;
}

}  // namespace

TEST_CASE("estimate_V hand examples") {
  Eigen::MatrixXd same(4, 2);
  same << 1, 2, 1, 2, 1, 2, 1, 2;
  CHECK(estimate_V(same).lpNorm<Eigen::Infinity>() == 0.0);

  Eigen::MatrixXd two(2, 1);
  two << 1, -1;
  CHECK(estimate_V(two)(0, 0) == doctest::Approx(2.0));

  Eigen::MatrixXd one(1, 1);
  one << 3;
  CHECK_THROWS_AS(estimate_V(one), std::invalid_argument);
}

TEST_CASE("V_hat matches the enumerated score covariance") {
  LargeFixture f = make_large_fixture(5000, 20000);
  const ScoreSeries series =
      build_score_series(f.model, f.chain, f.data, f.theta0);
  const Eigen::MatrixXd v = estimate_V(series.scores);
  // under correct specification the score covariance is Var T(Y) at theta0
  const ExactMoments mom = exact_moments(f.model, f.x, f.theta0);
  CHECK(frobenius_rel(v, mom.cov) < 0.15);
}

TEST_CASE("D_hat agrees with the enumeration oracle and with -V_hat") {
  LargeFixture f = make_large_fixture(5000, 100000);
  const Eigen::MatrixXd d = estimate_D(f.model, f.chain, f.data, f.theta0);
  const ExactMoments mom = exact_moments(f.model, f.x, f.theta0);
  CHECK(frobenius_rel(d, Eigen::MatrixXd(-mom.cov)) < 0.10);

  const ScoreSeries series =
      build_score_series(f.model, f.chain, f.data, f.theta0);
  const Eigen::MatrixXd v = estimate_V(series.scores);
  CHECK(frobenius_rel(d, Eigen::MatrixXd(-v)) < 0.20);

  // correct-specification ratio check: eigenvalues of -D^{-1}V near 1
  const Eigen::MatrixXd ratio = (-d).ldlt().solve(v);
  Eigen::VectorXcd eig = Eigen::EigenSolver<Eigen::MatrixXd>(ratio).eigenvalues();
  for (int j = 0; j < eig.size(); ++j) {
    CHECK(eig(j).real() > 0.7);
    CHECK(eig(j).real() < 1.4);
    CHECK(std::abs(eig(j).imag()) < 1e-8);
  }
}

TEST_CASE("psi_bar series averages near zero when theta_hat = psi") {
  AutologisticSpec aspec{2, 0};
  const ModelFamily model = build_autologistic(aspec);
  Eigen::VectorXd psi(model.param_dim);
  psi << 0.3, -0.2, 0.4;
  const Eigen::VectorXd x(0);

  Dataset data;
  data.response_dim = 2;
  data.covariate_dim = 0;
  data.covariates.resize(4, 0);
  data.responses = {0, 1, 2, 3};

  SamplerSpec sspec;
  sspec.reference_param = psi;
  sspec.reference_covariate = x;
  sspec.seed = 9;
  const MonteCarloChain chain = run_chain(model, sspec, 50000);

  const Eigen::MatrixXd series = psi_bar_series(model, chain, data, psi);
  REQUIRE(series.rows() == 50000);
  REQUIRE(series.cols() == model.param_dim);
  const Eigen::VectorXd mean = series.colwise().mean();
  CHECK(mean.lpNorm<Eigen::Infinity>() < 0.05);
}

TEST_CASE("batch-means W on an i.i.d. series matches the sample covariance") {
  Rng rng(31);
  const int m = 100000;
  Eigen::MatrixXd series(m, 2);
  for (int k = 0; k < m; ++k) {
    const double a = rng.normal(), b = rng.normal();
    series(k, 0) = a;
    series(k, 1) = 0.6 * a + 0.8 * b;  // correlated pair
  }
  const BatchMeans bm = estimate_W(series);
  CHECK(bm.batches == static_cast<int>(std::floor(std::sqrt(m))));
  CHECK(bm.batch_len == m / bm.batches);
  const Eigen::MatrixXd sample_cov = estimate_V(series);
  CHECK(frobenius_rel(bm.W, sample_cov) < 0.20);
}

TEST_CASE("batch-means W is zero for a constant series") {
  Eigen::MatrixXd series = Eigen::MatrixXd::Constant(400, 3, 2.5);
  CHECK(estimate_W(series).W.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("batch-means W refuses short series") {
  Eigen::MatrixXd series = Eigen::MatrixXd::Zero(99, 1);
  CHECK_THROWS_AS(estimate_W(series), std::invalid_argument);
}

TEST_CASE("batch-means W recovers the AR(1) long-run variance") {
  Rng rng(55);
  const int m = 1000000;
  Eigen::MatrixXd series(m, 1);
  double prev = 0.0;
  for (int k = 0; k < m; ++k) {
    prev = 0.5 * prev + rng.normal();
    series(k, 0) = prev;
  }
  // long-run variance 1/(1-a)^2 = 4 for a = 0.5, unit innovations
  const BatchMeans bm = estimate_W(series);
  CHECK(bm.W(0, 0) == doctest::Approx(4.0).epsilon(0.15));
  CHECK(initial_sequence_variance(series.col(0)) ==
        doctest::Approx(4.0).epsilon(0.15));
  CHECK(bm.W(0, 0) ==
        doctest::Approx(initial_sequence_variance(series.col(0))).epsilon(0.2));
}

TEST_CASE("sandwich scalar arithmetic and limits") {
  Eigen::MatrixXd v(1, 1), d(1, 1), w(1, 1);
  v << 4;
  d << -2;
  w << 9;
  CHECK(sandwich_cov(v, d, w, 100, 100)(0, 0) == doctest::Approx(0.0325));

  // W = 0, D = -V: classical inverse-information covariance V^{-1}/n
  Eigen::MatrixXd v3(3, 3);
  v3 << 2.0, 0.3, 0.1, 0.3, 1.5, -0.2, 0.1, -0.2, 1.0;
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(3, 3);
  const Eigen::MatrixXd s = sandwich_cov(v3, -v3, zero, 50, 1);
  CHECK(frobenius_rel(s, Eigen::MatrixXd(v3.inverse() / 50.0)) < 1e-12);

  // indefinite D refused with diagnostics
  Eigen::MatrixXd dpos(1, 1);
  dpos << 2;
  CHECK_THROWS_AS(sandwich_cov(v, dpos, w, 100, 100), std::runtime_error);
}

TEST_CASE("sandwich diagonal shrinks in n and m, and m-dominates to V/n") {
  Eigen::MatrixXd v(2, 2), d(2, 2), w(2, 2);
  v << 2.0, 0.4, 0.4, 1.2;
  d << -1.8, 0.2, 0.2, -1.1;
  w << 3.0, -0.5, -0.5, 2.0;

  const Eigen::MatrixXd base = sandwich_cov(v, d, w, 100, 100);
  const Eigen::MatrixXd more_n = sandwich_cov(v, d, w, 200, 100);
  const Eigen::MatrixXd more_m = sandwich_cov(v, d, w, 100, 200);
  for (int j = 0; j < 2; ++j) {
    CHECK(more_n(j, j) < base(j, j));
    CHECK(more_m(j, j) < base(j, j));
  }

  const Eigen::MatrixXd limit = sandwich_cov(v, d, w, 100, 1000000000);
  const Eigen::MatrixXd classical =
      sandwich_cov(v, d, Eigen::MatrixXd::Zero(2, 2), 100, 1);
  CHECK(frobenius_rel(limit, classical) < 1e-6);
}

TEST_CASE("normal quantile and Wald interval endpoints") {
  CHECK(std::abs(normal_quantile(0.975) - 1.959964) < 1e-6);
  CHECK(std::abs(normal_quantile(0.75) - 0.674490) < 1e-5);
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(normal_quantile(0.025) == doctest::Approx(-normal_quantile(0.975)));
  CHECK_THROWS_AS(normal_quantile(0.0), std::invalid_argument);
  CHECK_THROWS_AS(normal_quantile(1.0), std::invalid_argument);

  Eigen::VectorXd theta(2);
  theta << 0.0, 1.5;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2, 2);
  cov(0, 0) = 1.0;  // unit variance; second component degenerate
  const auto iv95 = wald_intervals(theta, cov, 0.95);
  CHECK(iv95[0].lo == doctest::Approx(-1.959964).epsilon(1e-6));
  CHECK(iv95[0].hi == doctest::Approx(1.959964).epsilon(1e-6));
  CHECK(iv95[1].lo == 1.5);
  CHECK(iv95[1].hi == 1.5);

  const auto iv50 = wald_intervals(theta, cov, 0.5);
  CHECK(iv50[0].hi == doctest::Approx(0.674490).epsilon(1e-5));

  CHECK_THROWS_AS(wald_intervals(theta, cov, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(wald_intervals(theta, cov, 1.0), std::invalid_argument);
  cov(1, 1) = -0.1;
  CHECK_THROWS_AS(wald_intervals(theta, cov, 0.95), std::runtime_error);
}

TEST_CASE("full covariance pipeline produces a PSD flagged report") {
  LargeFixture f = make_large_fixture(500, 5000);
  const AsymptoticCovariance ac =
      estimate_covariance(f.model, f.chain, f.data, f.theta0);
  CHECK(ac.n == 500);
  CHECK(ac.m == 5000);
  CHECK(ac.w_batches == static_cast<int>(std::floor(std::sqrt(5000.0))));
  CHECK(ac.d_negative_definite);
  CHECK(ac.d_max_eigenvalue < 0.0);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ac.sandwich);
  CHECK(es.eigenvalues().minCoeff() > -1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ew(ac.W_hat);
  CHECK(ew.eigenvalues().minCoeff() > -1e-10);
  CHECK((ac.V_hat - ac.V_hat.transpose()).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK((ac.sandwich - ac.sandwich.transpose()).lpNorm<Eigen::Infinity>() <
        1e-12);
}

#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "mcml/autologistic.hpp"
#include "mcml/model.hpp"
#include "test_util.hpp"

using namespace mcml;

TEST_CASE("unnorm_logf is zero at theta = 0") {
  AutologisticSpec spec{3, 2};
  const ModelFamily model = build_autologistic(spec);
  const Eigen::VectorXd theta = Eigen::VectorXd::Zero(model.param_dim);
  Eigen::VectorXd x(2);
  x << 1.5, -0.7;
  for (State y = 0; y < 8; ++y) {
    CHECK(model.unnorm_logf(x, y, theta) == 0.0);
  }
}

TEST_CASE("unnorm_logf d=1 packed example") {
  AutologisticSpec spec{1, 1};
  const ModelFamily model = build_autologistic(spec);
  Eigen::VectorXd theta(2), x(1);
  theta << 0.5, -1.0;  // (beta_11, alpha_11)
  x << 2.0;
  CHECK(model.unnorm_logf(x, 1, theta) == doctest::Approx(-1.5).epsilon(1e-15));
}

TEST_CASE("unnorm_logf matches the unpacked double sum, d=2 fixture") {
  AutologisticSpec spec{2, 2};
  const ModelFamily model = build_autologistic(spec);
  Eigen::VectorXd theta(7), x(2);
  theta << 0.3, 0.2, -0.1, 0.4, 0.0, 0.1, 0.0;
  x << 1.0, -1.0;
  const State y = 0b11;
  const double expected = testutil::unpacked_double_sum(spec, theta, x, y);
  CHECK(model.unnorm_logf(x, y, theta) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(expected == doctest::Approx(1.1).epsilon(1e-14));  // hand expansion
}

TEST_CASE("suff_stat packing, d=2 l=1") {
  AutologisticSpec spec{2, 1};
  const ModelFamily model = build_autologistic(spec);
  Eigen::VectorXd x(1);
  x << 2.0;
  const Eigen::VectorXd t = model.suff_stat(x, 0b01);  // y = (1,0)
  REQUIRE(t.size() == 5);
  CHECK(t(0) == 1.0);  // y1
  CHECK(t(1) == 0.0);  // 2 y1 y2
  CHECK(t(2) == 0.0);  // y2
  CHECK(t(3) == 2.0);  // y1 x1
  CHECK(t(4) == 0.0);  // y2 x1
}

TEST_CASE("suff_stat is all-zero at y = 0") {
  AutologisticSpec spec{4, 3};
  const ModelFamily model = build_autologistic(spec);
  Eigen::VectorXd x(3);
  x << 0.3, -2.0, 5.0;
  CHECK(model.suff_stat(x, 0).isZero(0.0));
}

TEST_CASE("suff_stat agrees with unpacked sums on random fixtures, d=3 l=2") {
  AutologisticSpec spec{3, 2};
  const ModelFamily model = build_autologistic(spec);
  Rng rng(2024);
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::VectorXd theta = testutil::random_vector(rng, model.param_dim);
    const Eigen::VectorXd x = testutil::random_vector(rng, 2, 2.0);
    const State y = static_cast<State>(rng.next_below(8));
    const double expected = testutil::unpacked_double_sum(spec, theta, x, y);
    CHECK(theta.dot(model.suff_stat(x, y)) ==
          doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("unnorm_logf is linear in theta and equals theta'T") {
  AutologisticSpec spec{3, 1};
  const ModelFamily model = build_autologistic(spec);
  Rng rng(7);
  for (int rep = 0; rep < 30; ++rep) {
    const Eigen::VectorXd t1 = testutil::random_vector(rng, model.param_dim);
    const Eigen::VectorXd t2 = testutil::random_vector(rng, model.param_dim);
    const double a = 2.0 * rng.uniform() - 1.0, b = 2.0 * rng.uniform() - 1.0;
    const Eigen::VectorXd x = testutil::random_vector(rng, 1, 3.0);
    const State y = static_cast<State>(rng.next_below(8));
    const double lhs = model.unnorm_logf(x, y, a * t1 + b * t2);
    const double rhs =
        a * model.unnorm_logf(x, y, t1) + b * model.unnorm_logf(x, y, t2);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    CHECK(model.unnorm_logf(x, y, t1) ==
          doctest::Approx(t1.dot(model.suff_stat(x, y))).epsilon(1e-12));
  }
}

TEST_CASE("dimension mismatches name the offending argument") {
  AutologisticSpec spec{2, 1};
  const ModelFamily model = build_autologistic(spec);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(model.param_dim);
  Eigen::VectorXd x_bad(3);
  x_bad << 1, 2, 3;
  Eigen::VectorXd x(1);
  x << 1.0;
  CHECK_THROWS_WITH_AS(model.unnorm_logf(x_bad, 0, theta),
                       doctest::Contains("x:"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(model.unnorm_logf(x, 0b100, theta),
                       doctest::Contains("y:"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(model.unnorm_logf(x, 0, Eigen::VectorXd::Zero(9)),
                       doctest::Contains("theta:"), std::invalid_argument);
}

TEST_CASE("dataset CSV round-trip and error context") {
  Dataset data;
  data.response_dim = 2;
  data.covariate_dim = 1;
  data.responses = {0b01, 0b10, 0b11};
  data.covariates.resize(3, 1);
  data.covariates << 0.25, -1.5, 3.0;

  const std::string path = "test_dataset_roundtrip.csv";
  write_dataset_csv(data, path);
  const Dataset back = read_dataset_csv(path);
  CHECK(back.response_dim == 2);
  CHECK(back.covariate_dim == 1);
  REQUIRE(back.n() == 3);
  CHECK(back.responses == data.responses);
  CHECK((back.covariates - data.covariates).cwiseAbs().maxCoeff() == 0.0);

  {
    std::ofstream bad("test_dataset_bad.csv");
    bad << "y_1,x_1\n1,0.5\n2,0.5\n";
  }
  CHECK_THROWS_WITH_AS(read_dataset_csv("test_dataset_bad.csv"),
                       doctest::Contains(":3:"), std::runtime_error);
  std::remove(path.c_str());
  std::remove("test_dataset_bad.csv");
}

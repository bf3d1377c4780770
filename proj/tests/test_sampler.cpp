#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "mcml/autologistic.hpp"
#include "mcml/oracle.hpp"
#include "mcml/sampler.hpp"
#include "test_util.hpp"

using namespace mcml;

namespace {

SamplerSpec make_spec(const Eigen::VectorXd& psi, const Eigen::VectorXd& x_ref,
                      std::uint64_t seed = 7,
                      ScanOrder scan = ScanOrder::RandomScan) {
  SamplerSpec spec;
  spec.reference_param = psi;
  spec.reference_covariate = x_ref;
  spec.scan = scan;
  spec.seed = seed;
  return spec;
}

// exact stationary probabilities pi(y) = exp(psi'T(x_ref, y) - log Z)
std::vector<double> exact_pi(const ModelFamily& model,
                             const Eigen::VectorXd& psi,
                             const Eigen::VectorXd& x_ref) {
  const double log_z = exact_log_Z(model, x_ref, psi);
  const int n_states = 1 << model.response_dim;
  std::vector<double> pi(n_states);
  for (int y = 0; y < n_states; ++y)
    pi[y] = std::exp(model.unnorm_logf(x_ref, static_cast<State>(y), psi) -
                     log_z);
  return pi;
}

}  // namespace

TEST_CASE("identical seeds reproduce the chain exactly") {
  AutologisticSpec aspec{3, 1};
  const ModelFamily model = build_autologistic(aspec);
  Rng rng(3);
  Eigen::VectorXd psi = testutil::random_vector(rng, model.param_dim, 0.5);
  Eigen::VectorXd x_ref(1);
  x_ref << 0.4;

  for (ScanOrder scan : {ScanOrder::RandomScan, ScanOrder::SymmetrizedSweep}) {
    const SamplerSpec spec = make_spec(psi, x_ref, 909, scan);
    const MonteCarloChain a = run_chain(model, spec, 500);
    const MonteCarloChain b = run_chain(model, spec, 500);
    REQUIRE(a.m() == 500);
    CHECK(a.states == b.states);
    CHECK(a.log_h == b.log_h);
    CHECK(a.seed_used == 909);
  }
}

TEST_CASE("different seeds give different trajectories") {
  AutologisticSpec aspec{3, 0};
  const ModelFamily model = build_autologistic(aspec);
  const Eigen::VectorXd psi = Eigen::VectorXd::Zero(model.param_dim);
  const Eigen::VectorXd x(0);

  const MonteCarloChain a = run_chain(model, make_spec(psi, x, 1), 200);
  const MonteCarloChain b = run_chain(model, make_spec(psi, x, 2), 200);
  CHECK(a.states != b.states);
}

TEST_CASE("m = 1 returns the single post-burn-in state deterministically") {
  AutologisticSpec aspec{2, 0};
  const ModelFamily model = build_autologistic(aspec);
  Eigen::VectorXd psi(model.param_dim);
  psi << 0.3, -0.2, 0.1;
  const Eigen::VectorXd x(0);

  const SamplerSpec spec = make_spec(psi, x, 77);
  const MonteCarloChain a = run_chain(model, spec, 1);
  const MonteCarloChain b = run_chain(model, spec, 1);
  REQUIRE(a.m() == 1);
  CHECK(a.states == b.states);
}

TEST_CASE("default burn-in is 100 sweeps per site") {
  SamplerSpec spec;
  CHECK(spec.effective_burn_in(3) == 300);
  spec.burn_in = 12;
  CHECK(spec.effective_burn_in(3) == 12);
  spec.burn_in = 0;
  CHECK(spec.effective_burn_in(3) == 0);
}

TEST_CASE("uniform stationary frequencies at psi = 0") {
  AutologisticSpec aspec{3, 0};
  const ModelFamily model = build_autologistic(aspec);
  const Eigen::VectorXd psi = Eigen::VectorXd::Zero(model.param_dim);
  const Eigen::VectorXd x(0);

  const int m = 40000;
  const MonteCarloChain chain = run_chain(model, make_spec(psi, x, 21), m);
  std::vector<int> counts(8, 0);
  for (State y : chain.states) counts[y]++;

  // frequency of each of the 8 states should be 1/8 within 4 standard
  // errors; the chain is positively correlated, so inflate se by 3
  const double p = 1.0 / 8.0;
  const double se = 3.0 * std::sqrt(p * (1 - p) / m);
  for (int y = 0; y < 8; ++y) {
    const double freq = static_cast<double>(counts[y]) / m;
    CHECK(std::abs(freq - p) < 4 * se);
  }
}

TEST_CASE("empirical distribution is close to exact pi in total variation") {
  AutologisticSpec aspec{3, 1};
  const ModelFamily model = build_autologistic(aspec);
  Eigen::VectorXd psi(model.param_dim);
  psi << 0.5, -0.3, 0.2, 0.4, -0.6, 0.3, 0.7, -0.2, 0.1;
  Eigen::VectorXd x_ref(1);
  x_ref << 0.8;
  const std::vector<double> pi = exact_pi(model, psi, x_ref);

  const int m = 1000000;
  for (ScanOrder scan : {ScanOrder::RandomScan, ScanOrder::SymmetrizedSweep}) {
    const MonteCarloChain chain = run_chain(model, make_spec(psi, x_ref, 5, scan), m);
    std::vector<double> freq(8, 0.0);
    for (State y : chain.states) freq[y] += 1.0 / m;
    double tv = 0.0;
    for (int y = 0; y < 8; ++y) tv += 0.5 * std::abs(freq[y] - pi[y]);
    CHECK(tv < 0.01);
  }
}

TEST_CASE("log_h is the exact log density in exact mode") {
  AutologisticSpec aspec{2, 1};
  const ModelFamily model = build_autologistic(aspec);
  Eigen::VectorXd psi(model.param_dim);
  psi << 0.2, -0.1, 0.3, 0.5, -0.4;
  Eigen::VectorXd x_ref(1);
  x_ref << 0.7;
  const double log_z = exact_log_Z(model, x_ref, psi);

  const SamplerSpec spec = make_spec(psi, x_ref, 33);
  const MonteCarloChain chain = run_chain(model, spec, 200);
  double total = 0.0;
  for (int k = 0; k < chain.m(); ++k) {
    const double expect =
        model.unnorm_logf(x_ref, chain.states[k], psi) - log_z;
    CHECK(chain.log_h[k] == doctest::Approx(expect).epsilon(1e-12));
    CHECK(chain.log_h[k] ==
          doctest::Approx(eval_log_h(model, spec, chain.states[k]))
              .epsilon(1e-12));
    total += std::exp(chain.log_h[k]);
  }
  CHECK(total > 0.0);
}

TEST_CASE("ratio mode shifts log_h by exactly log Z of the reference") {
  AutologisticSpec aspec{2, 1};
  const ModelFamily model = build_autologistic(aspec);
  Eigen::VectorXd psi(model.param_dim);
  psi << 0.2, -0.1, 0.3, 0.5, -0.4;
  Eigen::VectorXd x_ref(1);
  x_ref << 0.7;
  const double log_z = exact_log_Z(model, x_ref, psi);

  SamplerSpec exact_spec = make_spec(psi, x_ref, 33);
  SamplerSpec ratio_spec = exact_spec;
  ratio_spec.h_mode = HMode::Ratio;

  const MonteCarloChain a = run_chain(model, exact_spec, 200);
  const MonteCarloChain b = run_chain(model, ratio_spec, 200);
  REQUIRE(a.states == b.states);  // same seed, same trajectory
  for (int k = 0; k < a.m(); ++k)
    CHECK(b.log_h[k] - a.log_h[k] == doctest::Approx(log_z).epsilon(1e-12));
}

TEST_CASE("chain CSV export round trips states and log_h") {
  AutologisticSpec aspec{3, 0};
  const ModelFamily model = build_autologistic(aspec);
  Eigen::VectorXd psi(model.param_dim);
  psi << 0.4, -0.2, 0.1, 0.3, -0.5, 0.2;
  const Eigen::VectorXd x(0);

  const MonteCarloChain chain = run_chain(model, make_spec(psi, x, 44), 50);
  const std::string path = "chain_test_tmp.csv";
  write_chain_csv(chain, 3, path);

  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  CHECK(line == "k,y_1,y_2,y_3,log_h");
  int rows = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string field;
    std::getline(ss, field, ',');
    CHECK(std::stoi(field) == rows + 1);
    State y = 0;
    for (int s = 0; s < 3; ++s) {
      std::getline(ss, field, ',');
      const int b = std::stoi(field);
      REQUIRE((b == 0 || b == 1));
      y |= static_cast<State>(b) << s;
    }
    CHECK(y == chain.states[rows]);
    std::getline(ss, field, ',');
    CHECK(std::stod(field) == doctest::Approx(chain.log_h[rows]).epsilon(1e-15));
    ++rows;
  }
  CHECK(rows == 50);
  std::remove(path.c_str());
}

#pragma once

#include <vector>

#include "mcml/model.hpp"
#include "mcml/sampler.hpp"

namespace mcml {

// Chain collapsed to distinct states with multiplicities. The MCMCML
// objective is a function of the chain's empirical measure only, so all
// per-observation sums run over distinct states instead of all m steps.
struct CollapsedChain {
  std::vector<State> states;
  std::vector<double> counts;
  std::vector<double> log_h;
  int m_total = 0;

  explicit CollapsedChain(const MonteCarloChain& chain);
  int size() const { return static_cast<int>(states.size()); }
};

// value, gradient and Hessian of the objective l_n^m / n at theta, together
// with the per-observation quantities reused by the asymptotics module
struct ObjectiveState {
  double value = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  std::vector<double> log_cm;     // log C_m(X_i, theta), per observation
  Eigen::MatrixXd weighted_mean;  // n x p, per-i weighted mean of T(X_i, Y^.)
};

ObjectiveState evaluate_mcml(const ModelFamily& model,
                             const CollapsedChain& chain, const Dataset& data,
                             const Eigen::VectorXd& theta);

// log C_m(x, theta) by single-pass streaming log-sum-exp over the raw chain
double log_Cm(const ModelFamily& model, const MonteCarloChain& chain,
              const Eigen::VectorXd& x, const Eigen::VectorXd& theta);

double mcml_value(const ModelFamily& model, const MonteCarloChain& chain,
                  const Dataset& data, const Eigen::VectorXd& theta);
Eigen::VectorXd mcml_grad(const ModelFamily& model,
                          const MonteCarloChain& chain, const Dataset& data,
                          const Eigen::VectorXd& theta);
Eigen::MatrixXd mcml_hess(const ModelFamily& model,
                          const MonteCarloChain& chain, const Dataset& data,
                          const Eigen::VectorXd& theta);

// C_m(x,theta) / Z(x,theta); diagnostics only, exact-density h mode required
double zhat(const ModelFamily& model, const MonteCarloChain& chain,
            const Eigen::VectorXd& x, const Eigen::VectorXd& theta,
            double exact_log_z);

// missing-data maximand: sum_i log[(1/m) sum_k exp(theta'T(X_i,Y^k) - log h_k)]
double missing_data_value(const ModelFamily& model,
                          const MonteCarloChain& chain,
                          const Eigen::MatrixXd& observed_covariates,
                          const Eigen::VectorXd& theta);

}  // namespace mcml

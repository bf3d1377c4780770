#pragma once

#include <string>
#include <vector>

#include "mcml/model.hpp"
#include "mcml/objective.hpp"
#include "mcml/sampler.hpp"

namespace mcml {

// Per-observation plug-in scores and the per-chain-step series feeding the
// V and W estimators.
struct ScoreSeries {
  Eigen::MatrixXd scores;    // n x p, s_i = T(X_i,Y_i) - weighted mean T
  Eigen::MatrixXd psi_bar;   // m x p, plug-in Psi-bar(Y^k)
};

ScoreSeries build_score_series(const ModelFamily& model,
                               const MonteCarloChain& chain,
                               const Dataset& data,
                               const Eigen::VectorXd& theta_hat);

// sample covariance (divisor n-1) of the rows
Eigen::MatrixXd estimate_V(const Eigen::MatrixXd& scores);

// plug-in D-hat = Hessian of the MCMCML objective at theta-hat
Eigen::MatrixXd estimate_D(const ModelFamily& model,
                           const MonteCarloChain& chain, const Dataset& data,
                           const Eigen::VectorXd& theta_hat);

Eigen::MatrixXd psi_bar_series(const ModelFamily& model,
                               const MonteCarloChain& chain,
                               const Dataset& data,
                               const Eigen::VectorXd& theta_hat);

// Batch-means long-run covariance: floor(sqrt(m)) consecutive batches,
// remainder discarded, batch_len * covariance of batch means. PSD by
// construction. Requires m >= 100.
struct BatchMeans {
  Eigen::MatrixXd W;
  int batches = 0;
  int batch_len = 0;
};
BatchMeans estimate_W(const Eigen::MatrixXd& series);

// scalar initial-positive-sequence estimator, used to cross-check the
// batch-means diagonal in tests
double initial_sequence_variance(const Eigen::VectorXd& series);

// D^{-1} (V/n + W/m) D^{-1} via symmetric solves; throws std::runtime_error
// with eigenvalue diagnostics when D is not negative definite
Eigen::MatrixXd sandwich_cov(const Eigen::MatrixXd& V, const Eigen::MatrixXd& D,
                             const Eigen::MatrixXd& W, int n, int m);

// standard normal quantile (Wichura AS241), |error| < 1e-9 over (0,1)
double normal_quantile(double prob);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};
std::vector<Interval> wald_intervals(const Eigen::VectorXd& theta_hat,
                                     const Eigen::MatrixXd& sandwich,
                                     double level);

struct AsymptoticCovariance {
  Eigen::MatrixXd V_hat, D_hat, W_hat, sandwich;
  int n = 0, m = 0;
  int w_batches = 0, w_batch_len = 0;
  bool d_negative_definite = false;
  double d_max_eigenvalue = 0.0;
};

// full plug-in pipeline at theta-hat; on an indefinite D-hat the sandwich is
// left zero and the flag cleared instead of throwing
AsymptoticCovariance estimate_covariance(const ModelFamily& model,
                                         const MonteCarloChain& chain,
                                         const Dataset& data,
                                         const Eigen::VectorXd& theta_hat);

}  // namespace mcml

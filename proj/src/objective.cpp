#include "mcml/objective.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace mcml {

CollapsedChain::CollapsedChain(const MonteCarloChain& chain) {
  m_total = chain.m();
  if (m_total < 1) throw std::invalid_argument("chain: must be nonempty");
  std::unordered_map<State, int> index;
  index.reserve(chain.states.size());
  for (int k = 0; k < m_total; ++k) {
    const State y = chain.states[k];
    auto [it, inserted] = index.emplace(y, size());
    if (inserted) {
      states.push_back(y);
      counts.push_back(0.0);
      log_h.push_back(chain.log_h[k]);
    }
    counts[it->second] += 1.0;
  }
}

namespace {

double log_cm_collapsed(const ModelFamily& model, const CollapsedChain& chain,
                        const Eigen::VectorXd& x, const Eigen::VectorXd& theta,
                        Eigen::VectorXd& scratch) {
  double max_lw = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (int u = 0; u < chain.size(); ++u) {
    model.suff_stat_fn(x, chain.states[u], scratch);
    const double lw =
        theta.dot(scratch) - chain.log_h[u] + std::log(chain.counts[u]);
    if (lw <= max_lw) {
      sum += std::exp(lw - max_lw);
    } else {
      sum = sum * std::exp(max_lw - lw) + 1.0;
      max_lw = lw;
    }
  }
  return max_lw + std::log(sum) - std::log(static_cast<double>(chain.m_total));
}

}  // namespace

ObjectiveState evaluate_mcml(const ModelFamily& model,
                             const CollapsedChain& chain, const Dataset& data,
                             const Eigen::VectorXd& theta) {
  data.validate();
  if (data.response_dim != model.response_dim ||
      data.covariate_dim != model.covariate_dim) {
    throw std::invalid_argument("data: dimensions do not match the model");
  }
  if (theta.size() != model.param_dim) {
    throw std::invalid_argument("theta: expected dimension " +
                                std::to_string(model.param_dim));
  }
  const int n = data.n();
  const int p = model.param_dim;
  const int num_states = chain.size();

  ObjectiveState state;
  state.grad = Eigen::VectorXd::Zero(p);
  state.hess = Eigen::MatrixXd::Zero(p, p);
  state.log_cm.resize(n);
  state.weighted_mean.resize(n, p);

  Eigen::MatrixXd t_states(num_states, p);  // T(x_i, y_u) rows, per i
  Eigen::VectorXd log_w(num_states), w(num_states);
  Eigen::VectorXd t_obs(p), mu(p), diff(p);
  Eigen::VectorXd row(p);

  // the beta block of T does not depend on x; with l = 0 the whole table
  // can be filled once
  const bool t_depends_on_x = model.covariate_dim > 0;

  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd x = data.covariate_row(i);
    if (t_depends_on_x || i == 0) {
      for (int u = 0; u < num_states; ++u) {
        model.suff_stat_fn(x, chain.states[u], row);
        t_states.row(u) = row;
      }
    }
    for (int u = 0; u < num_states; ++u) {
      log_w(u) = theta.dot(t_states.row(u)) - chain.log_h[u] +
                 std::log(chain.counts[u]);
    }
    const double max_lw = log_w.maxCoeff();
    double sum_w = 0.0;
    mu.setZero();
    for (int u = 0; u < num_states; ++u) {
      w(u) = std::exp(log_w(u) - max_lw);
      sum_w += w(u);
      mu.noalias() += w(u) * t_states.row(u).transpose();
    }
    mu /= sum_w;
    state.log_cm[i] = max_lw + std::log(sum_w) -
                      std::log(static_cast<double>(chain.m_total));
    state.weighted_mean.row(i) = mu;

    model.suff_stat_fn(x, data.responses[i], t_obs);
    state.value += theta.dot(t_obs) - state.log_cm[i];
    state.grad += t_obs - mu;

    // centered second moment keeps the per-i covariance PSD in floating point
    for (int u = 0; u < num_states; ++u) {
      diff = t_states.row(u).transpose() - mu;
      state.hess.noalias() -= (w(u) / sum_w) * (diff * diff.transpose());
    }
  }
  state.value /= n;
  state.grad /= n;
  state.hess /= n;
  return state;
}

double log_Cm(const ModelFamily& model, const MonteCarloChain& chain,
              const Eigen::VectorXd& x, const Eigen::VectorXd& theta) {
  if (chain.m() < 1) throw std::invalid_argument("chain: must be nonempty");
  Eigen::VectorXd t(model.param_dim);
  double max_lw = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (int k = 0; k < chain.m(); ++k) {
    model.suff_stat_fn(x, chain.states[k], t);
    const double lw = theta.dot(t) - chain.log_h[k];
    if (lw <= max_lw) {
      sum += std::exp(lw - max_lw);
    } else {
      sum = sum * std::exp(max_lw - lw) + 1.0;
      max_lw = lw;
    }
  }
  return max_lw + std::log(sum) - std::log(static_cast<double>(chain.m()));
}

double mcml_value(const ModelFamily& model, const MonteCarloChain& chain,
                  const Dataset& data, const Eigen::VectorXd& theta) {
  return evaluate_mcml(model, CollapsedChain(chain), data, theta).value;
}

Eigen::VectorXd mcml_grad(const ModelFamily& model,
                          const MonteCarloChain& chain, const Dataset& data,
                          const Eigen::VectorXd& theta) {
  return evaluate_mcml(model, CollapsedChain(chain), data, theta).grad;
}

Eigen::MatrixXd mcml_hess(const ModelFamily& model,
                          const MonteCarloChain& chain, const Dataset& data,
                          const Eigen::VectorXd& theta) {
  return evaluate_mcml(model, CollapsedChain(chain), data, theta).hess;
}

double zhat(const ModelFamily& model, const MonteCarloChain& chain,
            const Eigen::VectorXd& x, const Eigen::VectorXd& theta,
            double exact_log_z) {
  if (chain.sampler.h_mode != HMode::ExactDensity) {
    throw std::invalid_argument(
        "chain: zhat requires exact-density h mode (Z_m is undefined when h "
        "is known only up to a constant)");
  }
  return std::exp(log_Cm(model, chain, x, theta) - exact_log_z);
}

double missing_data_value(const ModelFamily& model,
                          const MonteCarloChain& chain,
                          const Eigen::MatrixXd& observed_covariates,
                          const Eigen::VectorXd& theta) {
  if (observed_covariates.rows() < 1) {
    throw std::invalid_argument("observed: must contain at least one row");
  }
  if (observed_covariates.cols() != model.covariate_dim) {
    throw std::invalid_argument("observed: expected " +
                                std::to_string(model.covariate_dim) +
                                " covariate columns");
  }
  CollapsedChain collapsed(chain);
  Eigen::VectorXd scratch(model.param_dim);
  double total = 0.0;
  for (int i = 0; i < observed_covariates.rows(); ++i) {
    total += log_cm_collapsed(model, collapsed, observed_covariates.row(i),
                              theta, scratch);
  }
  return total;
}

}  // namespace mcml

#include "mcml/asymptotics.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace mcml {

ScoreSeries build_score_series(const ModelFamily& model,
                               const MonteCarloChain& chain,
                               const Dataset& data,
                               const Eigen::VectorXd& theta_hat) {
  const CollapsedChain collapsed(chain);
  const ObjectiveState obj = evaluate_mcml(model, collapsed, data, theta_hat);
  const int n = data.n();
  const int p = model.param_dim;

  ScoreSeries out;
  out.scores.resize(n, p);
  Eigen::VectorXd t(p);
  for (int i = 0; i < n; ++i) {
    model.suff_stat_fn(data.covariate_row(i), data.responses[i], t);
    out.scores.row(i) = t.transpose() - obj.weighted_mean.row(i);
  }

  // plug-in Psi-bar(y) = (1/n) sum_i p-hat(y|X_i)/h(y) [T(X_i,y) - E-hat T],
  // with p-hat = f / C_m; computed once per distinct chain state
  Eigen::MatrixXd per_state(collapsed.size(), p);
  per_state.setZero();
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd x = data.covariate_row(i);
    for (int u = 0; u < collapsed.size(); ++u) {
      model.suff_stat_fn(x, collapsed.states[u], t);
      const double lw =
          theta_hat.dot(t) - collapsed.log_h[u] - obj.log_cm[i];
      per_state.row(u) +=
          std::exp(lw) * (t.transpose() - obj.weighted_mean.row(i));
    }
  }
  per_state /= static_cast<double>(n);

  std::unordered_map<State, int> index;
  for (int u = 0; u < collapsed.size(); ++u) index[collapsed.states[u]] = u;
  out.psi_bar.resize(chain.m(), p);
  for (int k = 0; k < chain.m(); ++k) {
    out.psi_bar.row(k) = per_state.row(index.at(chain.states[k]));
  }
  return out;
}

Eigen::MatrixXd estimate_V(const Eigen::MatrixXd& scores) {
  const int n = static_cast<int>(scores.rows());
  if (n < 2) throw std::invalid_argument("scores: need n >= 2 observations");
  const Eigen::RowVectorXd mean = scores.colwise().mean();
  const Eigen::MatrixXd centered = scores.rowwise() - mean;
  return centered.transpose() * centered / (n - 1.0);
}

Eigen::MatrixXd estimate_D(const ModelFamily& model,
                           const MonteCarloChain& chain, const Dataset& data,
                           const Eigen::VectorXd& theta_hat) {
  return mcml_hess(model, chain, data, theta_hat);
}

Eigen::MatrixXd psi_bar_series(const ModelFamily& model,
                               const MonteCarloChain& chain,
                               const Dataset& data,
                               const Eigen::VectorXd& theta_hat) {
  return build_score_series(model, chain, data, theta_hat).psi_bar;
}

BatchMeans estimate_W(const Eigen::MatrixXd& series) {
  const int m = static_cast<int>(series.rows());
  if (m < 100) {
    throw std::invalid_argument(
        "series: batch-means needs m >= 100, got m = " + std::to_string(m));
  }
  const int p = static_cast<int>(series.cols());
  BatchMeans out;
  out.batches = static_cast<int>(std::floor(std::sqrt(double(m))));
  out.batch_len = m / out.batches;

  Eigen::MatrixXd means(out.batches, p);
  for (int b = 0; b < out.batches; ++b) {
    means.row(b) =
        series.middleRows(b * out.batch_len, out.batch_len).colwise().mean();
  }
  const Eigen::RowVectorXd grand = means.colwise().mean();
  const Eigen::MatrixXd centered = means.rowwise() - grand;
  out.W = out.batch_len * (centered.transpose() * centered) /
          (out.batches - 1.0);
  return out;
}

double initial_sequence_variance(const Eigen::VectorXd& series) {
  const int m = static_cast<int>(series.size());
  if (m < 4) throw std::invalid_argument("series: too short");
  const double mean = series.mean();
  auto gamma = [&](int lag) {
    double s = 0.0;
    for (int k = 0; k + lag < m; ++k) {
      s += (series(k) - mean) * (series(k + lag) - mean);
    }
    return s / m;
  };
  double sigma2 = -gamma(0);
  for (int j = 0; 2 * j + 1 < m; ++j) {
    const double pair = gamma(2 * j) + gamma(2 * j + 1);
    if (pair <= 0.0) break;
    sigma2 += 2.0 * pair;
  }
  return sigma2;
}

Eigen::MatrixXd sandwich_cov(const Eigen::MatrixXd& V, const Eigen::MatrixXd& D,
                             const Eigen::MatrixXd& W, int n, int m) {
  if (n < 1 || m < 1) throw std::invalid_argument("n, m must be >= 1");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(D);
  const double max_eig = eig.eigenvalues().maxCoeff();
  if (max_eig >= 0.0) {
    throw std::runtime_error(
        "D is not negative definite: largest eigenvalue " +
        std::to_string(max_eig));
  }
  const Eigen::MatrixXd meat = V / double(n) + W / double(m);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(D);
  const Eigen::MatrixXd half = ldlt.solve(meat);          // D^{-1} M
  Eigen::MatrixXd s = ldlt.solve(half.transpose());       // D^{-1} M D^{-1}
  return 0.5 * (s + s.transpose());
}

double normal_quantile(double prob) {
  // Wichura's algorithm AS241 (PPND16)
  if (!(prob > 0.0 && prob < 1.0)) {
    throw std::invalid_argument("prob: must lie in (0,1)");
  }
  const double q = prob - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                 6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
               1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
             1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                 3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
               5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
             4.2313330701600911252e+1) * r + 1.0);
  }
  double r = (q < 0.0) ? prob : 1.0 - prob;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
            3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
          4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
          2.05319162663775882187e+0) * r + 1.0);
  } else {
    r -= 5.0;
    value =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
          5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
  }
  return (q < 0.0) ? -value : value;
}

std::vector<Interval> wald_intervals(const Eigen::VectorXd& theta_hat,
                                     const Eigen::MatrixXd& sandwich,
                                     double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("level: must lie in (0,1)");
  }
  if (sandwich.rows() != theta_hat.size() ||
      sandwich.cols() != theta_hat.size()) {
    throw std::invalid_argument("sandwich: shape mismatch with theta_hat");
  }
  const double z = normal_quantile(0.5 * (1.0 + level));
  std::vector<Interval> out(theta_hat.size());
  for (int j = 0; j < theta_hat.size(); ++j) {
    const double var = sandwich(j, j);
    if (var < 0.0) {
      throw std::runtime_error("sandwich: negative diagonal entry at " +
                               std::to_string(j));
    }
    const double half = z * std::sqrt(var);
    out[j] = {theta_hat(j) - half, theta_hat(j) + half};
  }
  return out;
}

AsymptoticCovariance estimate_covariance(const ModelFamily& model,
                                         const MonteCarloChain& chain,
                                         const Dataset& data,
                                         const Eigen::VectorXd& theta_hat) {
  AsymptoticCovariance out;
  out.n = data.n();
  out.m = chain.m();

  const ScoreSeries series = build_score_series(model, chain, data, theta_hat);
  out.V_hat = estimate_V(series.scores);
  out.D_hat = estimate_D(model, chain, data, theta_hat);
  const BatchMeans bm = estimate_W(series.psi_bar);
  out.W_hat = bm.W;
  out.w_batches = bm.batches;
  out.w_batch_len = bm.batch_len;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.D_hat);
  out.d_max_eigenvalue = eig.eigenvalues().maxCoeff();
  out.d_negative_definite = out.d_max_eigenvalue < 0.0;
  if (out.d_negative_definite) {
    out.sandwich = sandwich_cov(out.V_hat, out.D_hat, out.W_hat, out.n, out.m);
  } else {
    out.sandwich = Eigen::MatrixXd::Zero(model.param_dim, model.param_dim);
  }
  return out;
}

}  // namespace mcml

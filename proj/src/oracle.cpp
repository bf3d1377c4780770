#include "mcml/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "mcml/objective.hpp"

namespace mcml {

namespace {

void require_enumerable(const ModelFamily& model, int cap) {
  if (model.response_dim > cap) {
    throw std::invalid_argument(
        "model: d = " + std::to_string(model.response_dim) +
        " exceeds the enumeration cap " + std::to_string(cap));
  }
}

// normalized state probabilities p(.|x,theta) over the binary enumeration
Eigen::VectorXd state_probs(const ModelFamily& model, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& theta, double* log_z_out) {
  const auto num = model.num_states();
  Eigen::VectorXd logf(num);
  Eigen::VectorXd t(model.param_dim);
  for (std::uint64_t y = 0; y < num; ++y) {
    model.suff_stat_fn(x, static_cast<State>(y), t);
    logf(y) = theta.dot(t);
  }
  const double shift = logf.maxCoeff();
  const Eigen::VectorXd w = (logf.array() - shift).exp();
  const double total = w.sum();
  if (log_z_out) *log_z_out = shift + std::log(total);
  return w / total;
}

}  // namespace

double exact_log_Z(const ModelFamily& model, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& theta) {
  require_enumerable(model, kEnumerationCap);
  model.check_args(&x, nullptr, &theta);
  double log_z = 0.0;
  state_probs(model, x, theta, &log_z);
  return log_z;
}

ExactMoments exact_moments(const ModelFamily& model, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& theta) {
  require_enumerable(model, kEnumerationCap);
  model.check_args(&x, nullptr, &theta);
  const Eigen::VectorXd probs = state_probs(model, x, theta, nullptr);
  const int p = model.param_dim;
  ExactMoments out;
  out.mean = Eigen::VectorXd::Zero(p);
  out.cov = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd t(p);
  for (std::uint64_t y = 0; y < model.num_states(); ++y) {
    model.suff_stat_fn(x, static_cast<State>(y), t);
    out.mean += probs(y) * t;
  }
  for (std::uint64_t y = 0; y < model.num_states(); ++y) {
    model.suff_stat_fn(x, static_cast<State>(y), t);
    const Eigen::VectorXd diff = t - out.mean;
    out.cov.noalias() += probs(y) * (diff * diff.transpose());
  }
  return out;
}

std::pair<Eigen::VectorXd, OptTrace> exact_mle(const ModelFamily& model,
                                               const Dataset& data,
                                               const OptimizerOptions& opts) {
  require_enumerable(model, kEnumerationCap);
  data.validate();
  const int n = data.n();
  const int p = model.param_dim;

  ObjectiveBundle bundle = [&](const Eigen::VectorXd& theta, double& value,
                               Eigen::VectorXd& grad, Eigen::MatrixXd& hess) {
    value = 0.0;
    grad.setZero(p);
    hess.setZero(p, p);
    Eigen::VectorXd t(p);
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd x = data.covariate_row(i);
      double log_z = 0.0;
      const Eigen::VectorXd probs = state_probs(model, x, theta, &log_z);
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(p);
      for (std::uint64_t y = 0; y < model.num_states(); ++y) {
        model.suff_stat_fn(x, static_cast<State>(y), t);
        mean += probs(y) * t;
      }
      model.suff_stat_fn(x, data.responses[i], t);
      value += theta.dot(t) - log_z;
      grad += t - mean;
      for (std::uint64_t y = 0; y < model.num_states(); ++y) {
        model.suff_stat_fn(x, static_cast<State>(y), t);
        const Eigen::VectorXd diff = t - mean;
        hess.noalias() -= probs(y) * (diff * diff.transpose());
      }
    }
    value /= n;
    grad /= n;
    hess /= n;
  };
  OptimizerOptions mle_opts = opts;
  mle_opts.grad_tol = std::min(opts.grad_tol, 1e-10);
  return maximize(bundle, Eigen::VectorXd::Zero(p), mle_opts);
}

namespace {

// single-site heat-bath kernel K_s as a dense matrix over the enumeration
Eigen::MatrixXd site_kernel(const ModelFamily& model,
                            const Eigen::VectorXd& x_ref,
                            const Eigen::VectorXd& psi, int site) {
  const auto num = model.num_states();
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(num, num);
  Eigen::VectorXd t1(model.param_dim), t0(model.param_dim);
  for (std::uint64_t y = 0; y < num; ++y) {
    double delta;
    const State ys = static_cast<State>(y);
    if (model.site_delta_fn) {
      delta = model.site_delta_fn(x_ref, ys, psi, site);
    } else {
      model.suff_stat_fn(x_ref, ys | (State{1} << site), t1);
      model.suff_stat_fn(x_ref, ys & ~(State{1} << site), t0);
      delta = psi.dot(t1) - psi.dot(t0);
    }
    const double p1 = 1.0 / (1.0 + std::exp(-delta));
    k(y, y | (State{1} << site)) += p1;
    k(y, y & ~(State{1} << site)) += 1.0 - p1;
  }
  return k;
}

Eigen::MatrixXd matrix_power(const Eigen::MatrixXd& a, int n) {
  Eigen::MatrixXd result =
      Eigen::MatrixXd::Identity(a.rows(), a.cols());
  Eigen::MatrixXd base = a;
  int e = n;
  while (e > 0) {
    if (e & 1) result = result * base;
    base = base * base;
    e >>= 1;
  }
  return result;
}

}  // namespace

KernelAnalysis build_kernel_analysis(const ModelFamily& model,
                                     const SamplerSpec& spec,
                                     const Eigen::VectorXd& nu,
                                     KernelVariant variant) {
  require_enumerable(model, kKernelCap);
  const int d = model.response_dim;
  const auto num = model.num_states();

  KernelAnalysis out;

  // stationary vector = h on the enumeration
  double log_z = 0.0;
  out.pi = state_probs(model, spec.reference_covariate, spec.reference_param,
                       &log_z);

  if (spec.scan == ScanOrder::RandomScan) {
    Eigen::MatrixXd avg = Eigen::MatrixXd::Zero(num, num);
    for (int s = 0; s < d; ++s) {
      avg += site_kernel(model, spec.reference_covariate, spec.reference_param,
                         s);
    }
    avg /= d;
    out.P = matrix_power(avg, d);  // one chain step = d random-site updates
  } else {
    Eigen::MatrixXd fwd = Eigen::MatrixXd::Identity(num, num);
    for (int s = 0; s < d; ++s) {
      fwd = fwd * site_kernel(model, spec.reference_covariate,
                              spec.reference_param, s);
    }
    if (variant == KernelVariant::PlainSystematicNoSymmetrization) {
      out.P = fwd;
    } else {
      Eigen::MatrixXd bwd = Eigen::MatrixXd::Identity(num, num);
      for (int s = d - 1; s >= 0; --s) {
        bwd = bwd * site_kernel(model, spec.reference_covariate,
                                spec.reference_param, s);
      }
      out.P = fwd * bwd;
    }
  }

  if (nu.size() > 0) {
    if (nu.size() != static_cast<Eigen::Index>(num)) {
      throw std::invalid_argument("nu: expected length 2^d");
    }
    out.nu = nu;
  } else {
    // law of Y^1: all-zeros initial state pushed through burn_in + 1 sweeps
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(num);
    row(0) = 1.0;
    const int steps = spec.effective_burn_in(d) + 1;
    for (int b = 0; b < steps; ++b) row = row * out.P;
    out.nu = row.transpose();
  }
  out.sup_ratio = (out.nu.array() / out.pi.array()).maxCoeff();

  // spectral radius of P - Pi on L^2_pi via the pi-symmetrized kernel
  const Eigen::VectorXd sq = out.pi.array().sqrt();
  Eigen::MatrixXd sym =
      sq.asDiagonal() * out.P * sq.cwiseInverse().asDiagonal();
  const double asymmetry = (sym - sym.transpose()).cwiseAbs().maxCoeff();
  Eigen::VectorXd abs_eigs;
  if (asymmetry < 1e-9) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
        0.5 * (sym + sym.transpose()));
    abs_eigs = eig.eigenvalues().cwiseAbs();
  } else {
    Eigen::EigenSolver<Eigen::MatrixXd> eig(sym);
    abs_eigs = eig.eigenvalues().cwiseAbs();
  }
  std::sort(abs_eigs.data(), abs_eigs.data() + abs_eigs.size(),
            std::greater<double>());
  out.rho = (abs_eigs.size() > 1) ? abs_eigs(1) : 0.0;
  return out;
}

TestFunction TestFunction::centered(const Eigen::VectorXd& raw,
                                    const Eigen::VectorXd& pi) {
  if (raw.size() != pi.size()) {
    throw std::invalid_argument("raw: length mismatch with pi");
  }
  TestFunction out;
  out.g = raw.array() - raw.dot(pi);
  out.norm_pi = std::sqrt(out.g.array().square().matrix().dot(pi));
  return out;
}

LemmaCheck lemma_bound_check(const KernelAnalysis& analysis,
                             const TestFunction& g, int k, int l) {
  if (k < 1 || l < k) {
    throw std::invalid_argument("indices: need 1 <= k <= l");
  }
  const double pi_mean = g.g.dot(analysis.pi);
  if (std::fabs(pi_mean) > 1e-12) {
    throw std::invalid_argument("g: must be pi-centered");
  }
  const Eigen::RowVectorXd front =
      analysis.nu.transpose() * matrix_power(analysis.P, k - 1);
  const Eigen::VectorXd back = matrix_power(analysis.P, l - k) * g.g;
  LemmaCheck out;
  out.lhs = std::fabs(front.dot(g.g.cwiseProduct(back)));
  out.rhs = analysis.sup_ratio * g.norm_pi * g.norm_pi *
            std::pow(analysis.rho, l - k);
  out.holds = out.lhs <= out.rhs + 1e-12;
  return out;
}

std::vector<Assumption7Row> assumption7_report(
    const ModelFamily& model, const std::vector<MonteCarloChain>& chains,
    const std::vector<Eigen::VectorXd>& covariate_grid,
    const Eigen::VectorXd& theta_star, double neighborhood_radius) {
  require_enumerable(model, kEnumerationCap);
  if (covariate_grid.empty()) {
    throw std::invalid_argument("covariate_grid: must be nonempty");
  }
  const int p = model.param_dim;

  // theta* plus axis-aligned perturbations spanning the neighborhood
  std::vector<Eigen::VectorXd> ball;
  ball.push_back(theta_star);
  for (int j = 0; j < p; ++j) {
    Eigen::VectorXd lo = theta_star, hi = theta_star;
    lo(j) -= neighborhood_radius;
    hi(j) += neighborhood_radius;
    ball.push_back(lo);
    ball.push_back(hi);
  }

  std::vector<Assumption7Row> rows;
  Eigen::VectorXd t(p);
  for (const auto& chain : chains) {
    if (chain.sampler.h_mode != HMode::ExactDensity) {
      throw std::invalid_argument(
          "chain: assumption-7 diagnostics require exact-density h mode");
    }
    const CollapsedChain collapsed(chain);
    Assumption7Row row;
    row.m = chain.m();
    for (const auto& x : covariate_grid) {
      double log_z = 0.0;
      state_probs(model, x, theta_star, &log_z);
      const ExactMoments mom = exact_moments(model, x, theta_star);

      double zhat_val = 0.0;
      Eigen::VectorXd grad = Eigen::VectorXd::Zero(p);
      for (int u = 0; u < collapsed.size(); ++u) {
        model.suff_stat_fn(x, collapsed.states[u], t);
        const double ratio =
            std::exp(theta_star.dot(t) - log_z - collapsed.log_h[u]) *
            collapsed.counts[u] / collapsed.m_total;
        zhat_val += ratio;
        grad += ratio * (t - mom.mean);
      }
      row.sup_zhat_minus_1 =
          std::max(row.sup_zhat_minus_1, std::fabs(zhat_val - 1.0));
      row.sup_grad = std::max(row.sup_grad, grad.norm());

      for (const auto& theta : ball) {
        double lz = 0.0;
        state_probs(model, x, theta, &lz);
        const ExactMoments m2 = exact_moments(model, x, theta);
        Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(p, p);
        for (int u = 0; u < collapsed.size(); ++u) {
          model.suff_stat_fn(x, collapsed.states[u], t);
          const double ratio =
              std::exp(theta.dot(t) - lz - collapsed.log_h[u]) *
              collapsed.counts[u] / collapsed.m_total;
          const Eigen::VectorXd diff = t - m2.mean;
          hess.noalias() += ratio * (diff * diff.transpose() - m2.cov);
        }
        row.sup_hess = std::max(row.sup_hess, hess.norm());
      }
    }
    rows.push_back(row);
  }
  return rows;
}

void write_assumption7_csv(const std::vector<Assumption7Row>& rows,
                           const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "m,sup_zhat_minus_1,sup_grad,sup_hess\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g\n", r.m,
                  r.sup_zhat_minus_1, r.sup_grad, r.sup_hess);
    out << buf;
  }
}

}  // namespace mcml

#include "mcml/sampler.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

#include "mcml/oracle.hpp"
#include "mcml/rng.hpp"

namespace mcml {

namespace {

double site_delta_generic(const ModelFamily& model, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& theta, State y, int site,
                          Eigen::VectorXd& t1, Eigen::VectorXd& t0) {
  model.suff_stat_fn(x, y | (State{1} << site), t1);
  model.suff_stat_fn(x, y & ~(State{1} << site), t0);
  return theta.dot(t1) - theta.dot(t0);
}

struct GibbsKernel {
  const ModelFamily& model;
  const Eigen::VectorXd& x;
  const Eigen::VectorXd& theta;
  Eigen::VectorXd scratch1, scratch0;

  GibbsKernel(const ModelFamily& m, const Eigen::VectorXd& xr,
              const Eigen::VectorXd& th)
      : model(m), x(xr), theta(th),
        scratch1(m.param_dim), scratch0(m.param_dim) {}

  void update_site(State& y, int site, Rng& rng) {
    double delta;
    if (model.site_delta_fn) {
      delta = model.site_delta_fn(x, y, theta, site);
    } else {
      delta = site_delta_generic(model, x, theta, y, site, scratch1, scratch0);
    }
    const double p1 = 1.0 / (1.0 + std::exp(-delta));
    if (rng.uniform() < p1) {
      y |= (State{1} << site);
    } else {
      y &= ~(State{1} << site);
    }
  }

  void sweep(State& y, ScanOrder scan, Rng& rng) {
    const int d = model.response_dim;
    if (scan == ScanOrder::RandomScan) {
      for (int j = 0; j < d; ++j) {
        update_site(y, static_cast<int>(rng.next_below(d)), rng);
      }
    } else {
      for (int s = 0; s < d; ++s) update_site(y, s, rng);
      for (int s = d - 1; s >= 0; --s) update_site(y, s, rng);
    }
  }
};

void check_spec(const ModelFamily& model, const SamplerSpec& spec) {
  if (spec.reference_covariate.size() != model.covariate_dim) {
    throw std::invalid_argument("reference_covariate: expected dimension " +
                                std::to_string(model.covariate_dim));
  }
  if (spec.reference_param.size() != model.param_dim) {
    throw std::invalid_argument("reference_param: expected dimension " +
                                std::to_string(model.param_dim));
  }
  if (spec.h_mode == HMode::ExactDensity && !model.enumerable()) {
    throw std::invalid_argument(
        "h_mode: exact-density requires d <= " +
        std::to_string(kEnumerationCap) + ", got d = " +
        std::to_string(model.response_dim));
  }
}

}  // namespace

double eval_log_h(const ModelFamily& model, const SamplerSpec& spec, State y) {
  check_spec(model, spec);
  const double logf =
      model.unnorm_logf(spec.reference_covariate, y, spec.reference_param);
  if (spec.h_mode == HMode::Ratio) return logf;
  return logf -
         exact_log_Z(model, spec.reference_covariate, spec.reference_param);
}

MonteCarloChain run_chain(const ModelFamily& model, const SamplerSpec& spec,
                          int m) {
  if (m < 1) throw std::invalid_argument("m: chain length must be >= 1");
  check_spec(model, spec);

  double log_z_ref = 0.0;
  if (spec.h_mode == HMode::ExactDensity) {
    log_z_ref =
        exact_log_Z(model, spec.reference_covariate, spec.reference_param);
  }

  MonteCarloChain chain;
  chain.sampler = spec;
  chain.seed_used = spec.seed;
  chain.states.reserve(m);
  chain.log_h.reserve(m);

  Rng rng(spec.seed);
  GibbsKernel kernel(model, spec.reference_covariate, spec.reference_param);
  State y = 0;
  const int burn = spec.effective_burn_in(model.response_dim);
  for (int b = 0; b < burn; ++b) kernel.sweep(y, spec.scan, rng);

  // log h per distinct state, memoized; states recur heavily for small d
  std::unordered_map<State, double> logf_cache;
  for (int k = 0; k < m; ++k) {
    kernel.sweep(y, spec.scan, rng);
    chain.states.push_back(y);
    auto it = logf_cache.find(y);
    if (it == logf_cache.end()) {
      const double logf = model.unnorm_logf(spec.reference_covariate, y,
                                            spec.reference_param);
      it = logf_cache.emplace(y, logf).first;
    }
    chain.log_h.push_back(it->second - log_z_ref);
  }
  return chain;
}

void write_chain_csv(const MonteCarloChain& chain, int d,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write chain file: " + path);
  out << "k";
  for (int c = 0; c < d; ++c) out << ",y_" << (c + 1);
  out << ",log_h\n";
  char buf[64];
  for (int k = 0; k < chain.m(); ++k) {
    out << (k + 1);
    for (int c = 0; c < d; ++c) out << ',' << bit(chain.states[k], c);
    std::snprintf(buf, sizeof(buf), "%.17g", chain.log_h[k]);
    out << ',' << buf << "\n";
  }
}

}  // namespace mcml

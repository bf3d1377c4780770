#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mcml/model.hpp"

namespace mcml {

enum class ScanOrder {
  RandomScan,        // d uniformly chosen single-site updates per step
  SymmetrizedSweep,  // sites 1..d then d..1; symmetrization keeps the
                     // composed kernel reversible
};

enum class HMode {
  ExactDensity,  // log_h normalized via exact enumeration of Z(x_ref, psi)
  Ratio,         // log_h known up to the constant log Z(x_ref, psi)
};

struct SamplerSpec {
  Eigen::VectorXd reference_covariate;  // x_ref
  Eigen::VectorXd reference_param;      // psi
  ScanOrder scan = ScanOrder::RandomScan;
  int burn_in = -1;  // in chain steps (sweeps); -1 selects the default 100*d
  std::uint64_t seed = 0;
  HMode h_mode = HMode::ExactDensity;

  int effective_burn_in(int d) const { return burn_in >= 0 ? burn_in : 100 * d; }
};

struct MonteCarloChain {
  std::vector<State> states;
  std::vector<double> log_h;  // log h(Y^k); unnormalized in Ratio mode
  SamplerSpec sampler;
  std::uint64_t seed_used = 0;

  int m() const { return static_cast<int>(states.size()); }
};

// Gibbs chain of length m with stationary density h(y) proportional to
// exp(psi'T(x_ref, y)), started from the all-zeros state, burn-in discarded.
MonteCarloChain run_chain(const ModelFamily& model, const SamplerSpec& spec,
                          int m);

double eval_log_h(const ModelFamily& model, const SamplerSpec& spec, State y);

// debug export: columns k, y_1..y_d, log_h
void write_chain_csv(const MonteCarloChain& chain, int d,
                     const std::string& path);

}  // namespace mcml

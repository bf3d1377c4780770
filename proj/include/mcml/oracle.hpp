#pragma once

#include <vector>

#include "mcml/model.hpp"
#include "mcml/optimizer.hpp"
#include "mcml/sampler.hpp"

namespace mcml {

// log Z(x, theta) = log sum over {0,1}^d of exp(theta'T(x,y)), by log-sum-exp
// over the full enumeration. Requires d <= kEnumerationCap.
double exact_log_Z(const ModelFamily& model, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& theta);

// mean and covariance of T(x, Y) under p(.|x,theta); these equal the gradient
// and Hessian of log Z in theta
struct ExactMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};
ExactMoments exact_moments(const ModelFamily& model, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& theta);

// genuine MLE: maximizes the exact mean log-likelihood with exact Z
std::pair<Eigen::VectorXd, OptTrace> exact_mle(
    const ModelFamily& model, const Dataset& data,
    const OptimizerOptions& opts = {});

// used only by tests/diagnostics: drop the backward half of the systematic
// sweep, producing a deliberately non-reversible kernel
enum class KernelVariant { AsImplemented, PlainSystematicNoSymmetrization };

struct KernelAnalysis {
  Eigen::MatrixXd P;    // exact one-step (one-sweep) kernel, 2^d x 2^d
  Eigen::VectorXd pi;   // stationary vector (= h on the enumeration)
  Eigen::VectorXd nu;   // initial distribution of Y^1
  double rho = 0.0;     // second-largest |eigenvalue| of the symmetrized P
  double sup_ratio = 0.0;  // max_y nu(y) / pi(y)
};

// Exact transition matrix of the implemented sampler and its spectral data.
// `nu` defaults (empty) to the law of Y^1: all-zeros pushed through burn-in+1
// sweeps. Requires d <= kKernelCap.
KernelAnalysis build_kernel_analysis(
    const ModelFamily& model, const SamplerSpec& spec,
    const Eigen::VectorXd& nu = Eigen::VectorXd(),
    KernelVariant variant = KernelVariant::AsImplemented);

struct TestFunction {
  Eigen::VectorXd g;     // values over the enumerated state space
  double norm_pi = 0.0;  // ||g||_pi

  // centers an arbitrary vector to pi-mean zero and records its pi-norm
  static TestFunction centered(const Eigen::VectorXd& raw,
                               const Eigen::VectorXd& pi);
};

struct LemmaCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

// |E[g(Y^k) g(Y^l)]| <= sup_ratio * ||g||_pi^2 * rho^(l-k), exact matrix
// arithmetic on the enumerated chain, Y^1 ~ nu. Indices are 1-based, k <= l.
LemmaCheck lemma_bound_check(const KernelAnalysis& analysis,
                             const TestFunction& g, int k, int l);

struct Assumption7Row {
  int m = 0;
  double sup_zhat_minus_1 = 0.0;  // sup_x |Zhat_m(x, theta*) - 1|
  double sup_grad = 0.0;          // sup_x |grad Zhat_m(x, theta*)|
  double sup_hess = 0.0;          // sup over theta-ball and x of ||hess Zhat_m||_F
};

// Verifies the three uniform-convergence diagnostics on chains of increasing
// length. Exact-density h mode only.
std::vector<Assumption7Row> assumption7_report(
    const ModelFamily& model, const std::vector<MonteCarloChain>& chains,
    const std::vector<Eigen::VectorXd>& covariate_grid,
    const Eigen::VectorXd& theta_star, double neighborhood_radius);

void write_assumption7_csv(const std::vector<Assumption7Row>& rows,
                           const std::string& path);

}  // namespace mcml

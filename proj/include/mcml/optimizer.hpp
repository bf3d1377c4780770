#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace mcml {

struct OptimizerOptions {
  double grad_tol = 1e-8;     // sup-norm of the gradient
  int max_iters = 200;
  double ridge_floor = 1e-10;
  double contraction = 0.5;   // line-search backtracking factor
  double armijo = 1e-4;

  void validate() const;
};

enum class TermReason {
  Converged,
  MaxIters,
  LineSearchFailure,
  Degenerate,  // persistent near-zero curvature along the gradient
};

std::string to_string(TermReason reason);

struct TraceEntry {
  Eigen::VectorXd theta;
  double value = 0.0;
  double grad_sup_norm = 0.0;
  double step = 0.0;
};

struct OptTrace {
  std::vector<TraceEntry> iterations;
  TermReason reason = TermReason::MaxIters;
  std::string diagnostic;  // set on Degenerate / LineSearchFailure
};

// value, gradient and Hessian of the objective at theta, computed together
using ObjectiveBundle =
    std::function<void(const Eigen::VectorXd& theta, double& value,
                       Eigen::VectorXd& grad, Eigen::MatrixXd& hess)>;

// Ridge-stabilized Newton ascent with Armijo backtracking for concave
// objectives. Returns the final iterate even on flagged termination.
std::pair<Eigen::VectorXd, OptTrace> maximize(const ObjectiveBundle& objective,
                                              const Eigen::VectorXd& theta0,
                                              const OptimizerOptions& opts = {});

}  // namespace mcml

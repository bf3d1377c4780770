#include "mcml/optimizer.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mcml {

void OptimizerOptions::validate() const {
  if (grad_tol <= 0 || max_iters <= 0 || ridge_floor <= 0 || armijo <= 0 ||
      contraction <= 0 || contraction >= 1) {
    throw std::invalid_argument("optimizer options: all fields must be "
                                "positive and contraction < 1");
  }
}

std::string to_string(TermReason reason) {
  switch (reason) {
    case TermReason::Converged: return "converged";
    case TermReason::MaxIters: return "max_iters";
    case TermReason::LineSearchFailure: return "line_search_failure";
    case TermReason::Degenerate: return "degenerate";
  }
  return "unknown";
}

namespace {

// Newton direction from (H - lambda I) d = -g with lambda the smallest
// power of 10 >= ridge_floor that yields a solvable system and an ascent
// direction.
bool newton_direction(const Eigen::MatrixXd& hess, const Eigen::VectorXd& grad,
                      double ridge_floor, Eigen::VectorXd& dir) {
  const int p = static_cast<int>(grad.size());
  double lambda = std::pow(10.0, std::ceil(std::log10(ridge_floor)));
  if (lambda < ridge_floor) lambda *= 10.0;
  for (int attempt = 0; attempt < 30; ++attempt, lambda *= 10.0) {
    Eigen::MatrixXd shifted = hess;
    shifted.diagonal().array() -= lambda;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(shifted);
    if (ldlt.info() != Eigen::Success) continue;
    dir = ldlt.solve(-grad);
    if (!dir.allFinite()) continue;
    if (grad.dot(dir) > 0.0) return true;  // ascent for the maximization
  }
  (void)p;
  return false;
}

}  // namespace

std::pair<Eigen::VectorXd, OptTrace> maximize(const ObjectiveBundle& objective,
                                              const Eigen::VectorXd& theta0,
                                              const OptimizerOptions& opts) {
  opts.validate();
  const int p = static_cast<int>(theta0.size());

  Eigen::VectorXd theta = theta0;
  double value = 0.0;
  Eigen::VectorXd grad(p);
  Eigen::MatrixXd hess(p, p);
  objective(theta, value, grad, hess);
  if (!std::isfinite(value)) {
    throw std::invalid_argument("theta0: objective is non-finite at the start");
  }

  OptTrace trace;
  trace.reason = TermReason::MaxIters;
  int flat_curvature_streak = 0;
  int stagnation_streak = 0;

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    const double grad_norm = grad.lpNorm<Eigen::Infinity>();
    trace.iterations.push_back({theta, value, grad_norm, 0.0});
    if (grad_norm <= opts.grad_tol) {
      trace.reason = TermReason::Converged;
      return {theta, trace};
    }

    // unboundedness guard: a gradient direction with no curvature means the
    // weighted covariance has degenerated in some statistic component
    const double gnorm2 = grad.squaredNorm();
    const double curvature = grad.dot(hess * grad) / gnorm2;
    if (curvature > -1e-5) {
      if (++flat_curvature_streak >= 5) {
        int worst = 0;
        grad.cwiseAbs().maxCoeff(&worst);
        trace.reason = TermReason::Degenerate;
        trace.diagnostic =
            "objective appears unbounded: near-zero curvature along the "
            "gradient for 5 iterations; largest score in statistic component " +
            std::to_string(worst);
        return {theta, trace};
      }
    } else {
      flat_curvature_streak = 0;
    }

    Eigen::VectorXd dir;
    if (!newton_direction(hess, grad, opts.ridge_floor, dir)) {
      trace.reason = TermReason::LineSearchFailure;
      trace.diagnostic = "no ascent direction found at any ridge level";
      return {theta, trace};
    }

    const double slope = grad.dot(dir);
    double step = 1.0;
    bool accepted = false;
    double new_value = value;
    Eigen::VectorXd new_theta;
    Eigen::VectorXd new_grad(p);
    Eigen::MatrixXd new_hess(p, p);
    for (int halving = 0; halving < 60; ++halving) {
      new_theta = theta + step * dir;
      objective(new_theta, new_value, new_grad, new_hess);
      if (std::isfinite(new_value) &&
          new_value >= value + opts.armijo * step * slope) {
        accepted = true;
        break;
      }
      step *= opts.contraction;
    }
    if (!accepted) {
      trace.reason = TermReason::LineSearchFailure;
      trace.diagnostic = "Armijo backtracking failed after 60 halvings";
      return {theta, trace};
    }
    trace.iterations.back().step = step;

    // Accepted steps whose gain is below the rounding noise of the objective
    // mean the iterate has hit double-precision accuracy: Armijo passes or
    // fails on rounding error alone from here on. Stop instead of burning
    // the full backtracking budget every remaining iteration.
    const double noise = 16.0 * std::numeric_limits<double>::epsilon() *
                         (1.0 + std::abs(value));
    stagnation_streak = (new_value - value <= noise) ? stagnation_streak + 1 : 0;

    theta = std::move(new_theta);
    value = new_value;
    grad = std::move(new_grad);
    hess = std::move(new_hess);

    if (stagnation_streak >= 2) {
      const double gnorm = grad.lpNorm<Eigen::Infinity>();
      trace.iterations.push_back({theta, value, gnorm, 0.0});
      if (gnorm <= 1e4 * opts.grad_tol) {
        trace.reason = TermReason::Converged;
      } else {
        trace.reason = TermReason::LineSearchFailure;
        trace.diagnostic =
            "objective progress fell below double-precision noise with "
            "gradient sup-norm " +
            std::to_string(gnorm);
      }
      return {theta, trace};
    }
  }

  trace.iterations.push_back(
      {theta, value, grad.lpNorm<Eigen::Infinity>(), 0.0});
  if (grad.lpNorm<Eigen::Infinity>() <= opts.grad_tol) {
    trace.reason = TermReason::Converged;
  }
  return {theta, trace};
}

}  // namespace mcml

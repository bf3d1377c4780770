#pragma once

#include <utility>
#include <vector>

#include "mcml/model.hpp"

namespace mcml {

// Autologistic model with covariates: pairwise auto-regression terms beta
// (symmetric, optionally masked to a neighborhood) and regression terms alpha.
//
// Parameter packing: theta = (beta upper triangle incl. diagonal, row-major
// over pairs r <= s restricted to the mask, then alpha row-major (r,s)).
// The sufficient statistic carries factor 2 on off-diagonal pair terms and
// factor 1 on diagonal terms, so theta'T equals the full symmetric double sum.
struct AutologisticSpec {
  int d = 1;
  int l = 0;
  bool full_mask = true;
  // unordered site pairs (0-based) with free beta entries; ignored when
  // full_mask is true. Diagonal pairs (r,r) are intercept terms.
  std::vector<std::pair<int, int>> mask;

  // builds a spec from an explicit d x d adjacency matrix; throws on an
  // asymmetric matrix
  static AutologisticSpec from_adjacency(int l,
                                         const Eigen::MatrixXi& adjacency);
};

// canonical (r <= s) pair list defining the beta block of theta
std::vector<std::pair<int, int>> beta_pairs(const AutologisticSpec& spec);

int autologistic_param_dim(const AutologisticSpec& spec);

ModelFamily build_autologistic(const AutologisticSpec& spec);

// P(y(site) = 1 | y(-site), x, theta), site is 0-based
double full_conditional(const AutologisticSpec& spec,
                        const Eigen::VectorXd& theta, const Eigen::VectorXd& x,
                        State y, int site);

}  // namespace mcml

#include "mcml/autologistic.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>
#include <stdexcept>

namespace mcml {

AutologisticSpec AutologisticSpec::from_adjacency(
    int l, const Eigen::MatrixXi& adjacency) {
  if (adjacency.rows() != adjacency.cols()) {
    throw std::invalid_argument("adjacency: matrix must be square");
  }
  const int d = static_cast<int>(adjacency.rows());
  AutologisticSpec spec;
  spec.d = d;
  spec.l = l;
  spec.full_mask = false;
  for (int r = 0; r < d; ++r) {
    for (int s = 0; s < d; ++s) {
      if ((adjacency(r, s) != 0) != (adjacency(s, r) != 0)) {
        throw std::invalid_argument(
            "adjacency: asymmetric mask at pair (" + std::to_string(r) + "," +
            std::to_string(s) + ")");
      }
      if (r <= s && adjacency(r, s) != 0) spec.mask.emplace_back(r, s);
    }
  }
  return spec;
}

std::vector<std::pair<int, int>> beta_pairs(const AutologisticSpec& spec) {
  if (spec.d < 1) throw std::invalid_argument("spec: d must be >= 1");
  if (spec.l < 0) throw std::invalid_argument("spec: l must be >= 0");
  std::vector<std::pair<int, int>> pairs;
  if (spec.full_mask) {
    for (int r = 0; r < spec.d; ++r)
      for (int s = r; s < spec.d; ++s) pairs.emplace_back(r, s);
    return pairs;
  }
  std::set<std::pair<int, int>> canon;
  for (auto [r, s] : spec.mask) {
    if (r < 0 || r >= spec.d || s < 0 || s >= spec.d) {
      throw std::invalid_argument("mask: pair (" + std::to_string(r) + "," +
                                  std::to_string(s) + ") out of range");
    }
    canon.emplace(std::min(r, s), std::max(r, s));
  }
  pairs.assign(canon.begin(), canon.end());
  return pairs;
}

int autologistic_param_dim(const AutologisticSpec& spec) {
  return static_cast<int>(beta_pairs(spec).size()) + spec.d * spec.l;
}

namespace {

// per-site view of the beta block used by the Gibbs fast path
struct SiteLinks {
  int diag_index = -1;                        // theta index of beta_ss
  std::vector<std::pair<int, int>> coupled;   // (theta index, other site)
};

struct PackedSpec {
  int d, l, p_beta;
  std::vector<std::pair<int, int>> pairs;
  std::vector<SiteLinks> links;
};

std::shared_ptr<const PackedSpec> pack(const AutologisticSpec& spec) {
  auto ps = std::make_shared<PackedSpec>();
  ps->d = spec.d;
  ps->l = spec.l;
  ps->pairs = beta_pairs(spec);
  ps->p_beta = static_cast<int>(ps->pairs.size());
  ps->links.resize(spec.d);
  for (int j = 0; j < ps->p_beta; ++j) {
    auto [r, s] = ps->pairs[j];
    if (r == s) {
      ps->links[r].diag_index = j;
    } else {
      ps->links[r].coupled.emplace_back(j, s);
      ps->links[s].coupled.emplace_back(j, r);
    }
  }
  return ps;
}

double site_delta(const PackedSpec& ps, const Eigen::VectorXd& theta,
                  const Eigen::VectorXd& x, State y, int site) {
  double delta = 0.0;
  const SiteLinks& ln = ps.links[site];
  if (ln.diag_index >= 0) delta += theta(ln.diag_index);
  for (auto [j, other] : ln.coupled) {
    if (bit(y, other)) delta += 2.0 * theta(j);
  }
  const int base = ps.p_beta + site * ps.l;
  for (int t = 0; t < ps.l; ++t) delta += theta(base + t) * x(t);
  return delta;
}

}  // namespace

ModelFamily build_autologistic(const AutologisticSpec& spec) {
  auto ps = pack(spec);
  ModelFamily model;
  model.response_dim = spec.d;
  model.covariate_dim = spec.l;
  model.param_dim = ps->p_beta + spec.d * spec.l;
  model.suff_stat_fn = [ps](const Eigen::VectorXd& x, State y,
                            Eigen::VectorXd& out) {
    for (int j = 0; j < ps->p_beta; ++j) {
      auto [r, s] = ps->pairs[j];
      if (r == s) {
        out(j) = bit(y, r);
      } else {
        out(j) = 2.0 * bit(y, r) * bit(y, s);
      }
    }
    int idx = ps->p_beta;
    for (int r = 0; r < ps->d; ++r) {
      const double yr = bit(y, r);
      for (int s = 0; s < ps->l; ++s) out(idx++) = yr * x(s);
    }
  };
  model.site_delta_fn = [ps](const Eigen::VectorXd& x, State y,
                             const Eigen::VectorXd& theta, int site) {
    return site_delta(*ps, theta, x, y, site);
  };
  return model;
}

double full_conditional(const AutologisticSpec& spec,
                        const Eigen::VectorXd& theta, const Eigen::VectorXd& x,
                        State y, int site) {
  if (site < 0 || site >= spec.d) {
    throw std::invalid_argument("site: index " + std::to_string(site) +
                                " out of range [0," + std::to_string(spec.d) +
                                ")");
  }
  auto ps = pack(spec);
  if (theta.size() != ps->p_beta + spec.d * spec.l) {
    throw std::invalid_argument("theta: expected dimension " +
                                std::to_string(ps->p_beta + spec.d * spec.l) +
                                ", got " + std::to_string(theta.size()));
  }
  if (x.size() != spec.l) {
    throw std::invalid_argument("x: expected dimension " +
                                std::to_string(spec.l) + ", got " +
                                std::to_string(x.size()));
  }
  const double delta = site_delta(*ps, theta, x, y, site);
  return 1.0 / (1.0 + std::exp(-delta));
}

}  // namespace mcml

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace mcml {

// Binary response y in {0,1}^d packed into a bit mask, y(1) in bit 0.
// The enumeration order of the state space is binary counting on this mask.
using State = std::uint32_t;

inline int bit(State y, int site) { return static_cast<int>((y >> site) & 1u); }

constexpr int kEnumerationCap = 20;  // 2^d states must stay enumerable
constexpr int kKernelCap = 10;       // dense 2^d x 2^d transition matrices

// Exponential-family model on {0,1}^d with log f(y|x,theta) = theta'T(x,y).
struct ModelFamily {
  int param_dim = 0;
  int response_dim = 0;   // d
  int covariate_dim = 0;  // l

  // writes T(x,y) into `out` (pre-sized to param_dim)
  std::function<void(const Eigen::VectorXd& x, State y, Eigen::VectorXd& out)>
      suff_stat_fn;
  // optional fast path: theta'T(x, y|site=1) - theta'T(x, y|site=0)
  std::function<double(const Eigen::VectorXd& x, State y,
                       const Eigen::VectorXd& theta, int site)>
      site_delta_fn;

  Eigen::VectorXd suff_stat(const Eigen::VectorXd& x, State y) const;
  double unnorm_logf(const Eigen::VectorXd& x, State y,
                     const Eigen::VectorXd& theta) const;

  bool enumerable() const { return response_dim <= kEnumerationCap; }
  std::uint64_t num_states() const { return std::uint64_t{1} << response_dim; }

  // throws std::invalid_argument naming the offending argument
  void check_args(const Eigen::VectorXd* x, const State* y,
                  const Eigen::VectorXd* theta) const;
};

struct Dataset {
  int response_dim = 0;   // d
  int covariate_dim = 0;  // l
  std::vector<State> responses;
  Eigen::MatrixXd covariates;  // n x l, one row per observation

  int n() const { return static_cast<int>(responses.size()); }
  Eigen::VectorXd covariate_row(int i) const { return covariates.row(i); }
  void validate() const;
};

// CSV with header y_1,...,y_d,x_1,...,x_l; y columns 0/1, x columns finite.
Dataset read_dataset_csv(const std::string& path);
void write_dataset_csv(const Dataset& data, const std::string& path);

}  // namespace mcml

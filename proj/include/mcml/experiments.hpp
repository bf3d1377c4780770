#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mcml/asymptotics.hpp"
#include "mcml/autologistic.hpp"
#include "mcml/model.hpp"
#include "mcml/optimizer.hpp"
#include "mcml/oracle.hpp"
#include "mcml/sampler.hpp"

namespace mcml {

enum class CovariateGenerator {
  Fixed,          // rows from a CSV file, cycled
  UniformBox,     // i.i.d. uniform on [cov_lo, cov_hi]^l
  NormalClipped,  // i.i.d. standard normal clipped at +-3
};

struct ExperimentConfig {
  AutologisticSpec spec;
  Eigen::VectorXd theta0;

  CovariateGenerator cov_gen = CovariateGenerator::UniformBox;
  std::string cov_file;
  Eigen::MatrixXd fixed_covariates;
  double cov_lo = -1.0;
  double cov_hi = 1.0;

  int n = 100;
  int m = 1000;
  int replications = 1;

  Eigen::VectorXd psi;    // empty: zero vector
  Eigen::VectorXd x_ref;  // empty: generator mean (or dataset mean for fit)
  ScanOrder scan = ScanOrder::RandomScan;
  int burn_in = -1;
  HMode h_mode = HMode::ExactDensity;

  double level = 0.95;
  std::uint64_t seed = 0;
  int workers = 1;
  bool ablate_w = false;  // also report intervals with the W/m term dropped

  // diagnose
  std::vector<int> a7_m = {1000, 100000};
  double a7_radius = 0.1;
  int a7_grid = 20;
  bool plain_systematic = false;  // test hook: skip sweep symmetrization

  void validate() const;
};

// flat key = value file, '#' comments; see README for the key list
ExperimentConfig load_config(const std::string& path);

// mean covariate of the configured generator, used as the default x_ref
Eigen::VectorXd generator_mean(const ExperimentConfig& config);

SamplerSpec make_sampler_spec(const ExperimentConfig& config,
                              const Eigen::VectorXd& x_ref_fallback,
                              std::uint64_t seed);

// n i.i.d. pairs with Y_i | X_i drawn exactly from p(.|X_i, theta0) by
// inverse CDF over the enumerated state probabilities
Dataset simulate_dataset(const ExperimentConfig& config, std::uint64_t seed);

struct FitResult {
  Eigen::VectorXd theta_hat;
  OptTrace trace;
  AsymptoticCovariance cov;
  std::vector<Interval> intervals;
  std::uint64_t chain_seed = 0;
  bool flagged = false;  // non-convergence, degeneracy, or indefinite D-hat
};

FitResult fit_dataset(const ModelFamily& model, const ExperimentConfig& config,
                      const Dataset& data, std::uint64_t chain_seed);

std::string fit_report_json(const FitResult& fit);

struct ReplicationRow {
  std::uint64_t seed = 0;
  Eigen::VectorXd theta_hat;
  std::vector<int> hit;          // 1 when the Wald interval covers theta0
  std::vector<int> hit_ablated;  // intervals with W forced to zero
  Eigen::VectorXd se;            // sqrt of the sandwich diagonal
  Eigen::VectorXd standardized;  // (V/n + W/m)^{-1/2} D (theta_hat - theta0)
  bool flagged = false;
};

struct CoverageReport {
  std::vector<ReplicationRow> rows;
  Eigen::VectorXd coverage;          // per component, over unflagged rows
  Eigen::VectorXd coverage_ablated;  // filled when ablate_w is set
  Eigen::MatrixXd empirical_cov;     // covariance of theta_hat across rows
  Eigen::MatrixXd mean_sandwich;
  int flagged_rows = 0;
};

CoverageReport run_coverage(const ExperimentConfig& config);

void write_coverage_csv(const CoverageReport& report, const std::string& path);
std::string coverage_summary_json(const CoverageReport& report,
                                  const ExperimentConfig& config);

struct DiagnoseResult {
  KernelAnalysis analysis;
  double stationarity_err = 0.0;   // max |pi'P - pi|
  double reversibility_err = 0.0;  // max asymmetry of diag(pi) P
  int lemma_cases = 0;
  int lemma_failures = 0;
  std::vector<Assumption7Row> a7;

  bool hard_failure() const {
    return stationarity_err > 1e-12 || reversibility_err > 1e-12 ||
           lemma_failures > 0;
  }
};

// kernel validity checks, a Lemma-1 bound sweep and the assumption-7 table;
// CSVs are written under out_dir when it is nonempty
DiagnoseResult run_diagnose(const ExperimentConfig& config,
                            const std::string& out_dir);

}  // namespace mcml

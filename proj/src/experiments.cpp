#include "mcml/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "mcml/objective.hpp"
#include "mcml/rng.hpp"
#include "nlohmann/json.hpp"

namespace mcml {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

Eigen::VectorXd parse_vector(const std::string& value, const std::string& key) {
  std::vector<double> vals;
  std::stringstream ss(value);
  std::string field;
  while (std::getline(ss, field, ',')) {
    field = trim(field);
    if (field.empty()) continue;
    try {
      vals.push_back(std::stod(field));
    } catch (const std::exception&) {
      throw std::runtime_error("config key '" + key + "': bad number '" +
                               field + "'");
    }
  }
  Eigen::VectorXd out(vals.size());
  for (size_t i = 0; i < vals.size(); ++i) out(i) = vals[i];
  return out;
}

// pairs like "1,2;2,3" with 1-based site indices
std::vector<std::pair<int, int>> parse_mask(const std::string& value) {
  std::vector<std::pair<int, int>> pairs;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ';')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto comma = item.find(',');
    if (comma == std::string::npos) {
      throw std::runtime_error("config key 'mask': expected 'r,s' pairs");
    }
    const int r = std::stoi(trim(item.substr(0, comma)));
    const int s = std::stoi(trim(item.substr(comma + 1)));
    pairs.emplace_back(r - 1, s - 1);
  }
  return pairs;
}

Eigen::MatrixXd read_covariate_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open covariate file: " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error(path + ": empty covariate file");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  int l = 0;
  {
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      if (trim(field).rfind("x_", 0) != 0) {
        throw std::runtime_error(path + ": covariate header must be x_1,...");
      }
      ++l;
    }
  }
  std::vector<Eigen::VectorXd> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    Eigen::VectorXd x = parse_vector(line, "cov_file row " +
                                               std::to_string(lineno));
    if (x.size() != l) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected " + std::to_string(l) + " fields");
    }
    rows.push_back(std::move(x));
  }
  if (rows.empty()) throw std::runtime_error(path + ": no covariate rows");
  Eigen::MatrixXd out(rows.size(), l);
  for (size_t i = 0; i < rows.size(); ++i) out.row(i) = rows[i];
  return out;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (spec.d < 1) throw std::runtime_error("config: d must be >= 1");
  if (spec.l < 0) throw std::runtime_error("config: l must be >= 0");
  if (n < 1) throw std::runtime_error("config: n must be >= 1");
  if (m < 1) throw std::runtime_error("config: m must be >= 1");
  if (replications < 1) throw std::runtime_error("config: R must be >= 1");
  if (!(level > 0.0 && level < 1.0)) {
    throw std::runtime_error("config: level must lie in (0,1)");
  }
  if (workers < 1) throw std::runtime_error("config: workers must be >= 1");
  const int p = autologistic_param_dim(spec);
  if (theta0.size() > 0 && theta0.size() != p) {
    throw std::runtime_error("config: theta0 has " +
                             std::to_string(theta0.size()) +
                             " entries, model needs " + std::to_string(p));
  }
  if (psi.size() > 0 && psi.size() != p) {
    throw std::runtime_error("config: psi dimension mismatch");
  }
  if (x_ref.size() > 0 && x_ref.size() != spec.l) {
    throw std::runtime_error("config: x_ref dimension mismatch");
  }
  if (cov_gen == CovariateGenerator::Fixed && fixed_covariates.rows() == 0) {
    throw std::runtime_error("config: cov_gen=fixed requires cov_file");
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);

  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  bool saw_mask = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "d") cfg.spec.d = std::stoi(value);
      else if (key == "l") cfg.spec.l = std::stoi(value);
      else if (key == "mask") {
        saw_mask = true;
        if (value == "full") {
          cfg.spec.full_mask = true;
        } else {
          cfg.spec.full_mask = false;
          cfg.spec.mask = parse_mask(value);
        }
      }
      else if (key == "theta0") cfg.theta0 = parse_vector(value, key);
      else if (key == "cov_gen") {
        if (value == "fixed") cfg.cov_gen = CovariateGenerator::Fixed;
        else if (value == "uniform") cfg.cov_gen = CovariateGenerator::UniformBox;
        else if (value == "normal") cfg.cov_gen = CovariateGenerator::NormalClipped;
        else throw std::runtime_error("cov_gen must be fixed|uniform|normal");
      }
      else if (key == "cov_file") cfg.cov_file = value;
      else if (key == "cov_lo") cfg.cov_lo = std::stod(value);
      else if (key == "cov_hi") cfg.cov_hi = std::stod(value);
      else if (key == "n") cfg.n = std::stoi(value);
      else if (key == "m") cfg.m = std::stoi(value);
      else if (key == "R") cfg.replications = std::stoi(value);
      else if (key == "psi") cfg.psi = parse_vector(value, key);
      else if (key == "x_ref") cfg.x_ref = parse_vector(value, key);
      else if (key == "scan") {
        if (value == "random") cfg.scan = ScanOrder::RandomScan;
        else if (value == "systematic") cfg.scan = ScanOrder::SymmetrizedSweep;
        else throw std::runtime_error("scan must be random|systematic");
      }
      else if (key == "burn_in") cfg.burn_in = std::stoi(value);
      else if (key == "h_mode") {
        if (value == "exact") cfg.h_mode = HMode::ExactDensity;
        else if (value == "ratio") cfg.h_mode = HMode::Ratio;
        else throw std::runtime_error("h_mode must be exact|ratio");
      }
      else if (key == "level") cfg.level = std::stod(value);
      else if (key == "seed") cfg.seed = std::stoull(value);
      else if (key == "workers") cfg.workers = std::stoi(value);
      else if (key == "ablate_w") cfg.ablate_w = (value == "1" || value == "true");
      else if (key == "a7_m") {
        cfg.a7_m.clear();
        const Eigen::VectorXd v = parse_vector(value, key);
        for (int i = 0; i < v.size(); ++i) cfg.a7_m.push_back((int)v(i));
      }
      else if (key == "a7_radius") cfg.a7_radius = std::stod(value);
      else if (key == "a7_grid") cfg.a7_grid = std::stoi(value);
      else if (key == "plain_systematic") cfg.plain_systematic = (value == "1" || value == "true");
      else throw std::runtime_error("unknown key '" + key + "'");
    } catch (const std::runtime_error&) {
      throw;
    } catch (const std::exception&) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": bad value for key '" + key + "'");
    }
  }
  (void)saw_mask;
  if (!cfg.cov_file.empty()) {
    cfg.fixed_covariates = read_covariate_csv(cfg.cov_file);
    if (cfg.fixed_covariates.cols() != cfg.spec.l) {
      throw std::runtime_error("cov_file has " +
                               std::to_string(cfg.fixed_covariates.cols()) +
                               " columns, config l = " +
                               std::to_string(cfg.spec.l));
    }
  }
  if (cfg.theta0.size() == 0) {
    cfg.theta0 = Eigen::VectorXd::Zero(autologistic_param_dim(cfg.spec));
  }
  cfg.validate();
  return cfg;
}

Eigen::VectorXd generator_mean(const ExperimentConfig& config) {
  switch (config.cov_gen) {
    case CovariateGenerator::Fixed:
      return config.fixed_covariates.colwise().mean();
    case CovariateGenerator::UniformBox:
      return Eigen::VectorXd::Constant(config.spec.l,
                                       0.5 * (config.cov_lo + config.cov_hi));
    case CovariateGenerator::NormalClipped:
      return Eigen::VectorXd::Zero(config.spec.l);
  }
  return Eigen::VectorXd::Zero(config.spec.l);
}

SamplerSpec make_sampler_spec(const ExperimentConfig& config,
                              const Eigen::VectorXd& x_ref_fallback,
                              std::uint64_t seed) {
  SamplerSpec spec;
  const int p = autologistic_param_dim(config.spec);
  spec.reference_param =
      config.psi.size() > 0 ? config.psi : Eigen::VectorXd::Zero(p);
  spec.reference_covariate =
      config.x_ref.size() > 0 ? config.x_ref : x_ref_fallback;
  spec.scan = config.scan;
  spec.burn_in = config.burn_in;
  spec.seed = seed;
  spec.h_mode = config.h_mode;
  return spec;
}

Dataset simulate_dataset(const ExperimentConfig& config, std::uint64_t seed) {
  config.validate();
  if (config.spec.d > kEnumerationCap) {
    throw std::runtime_error("simulate: d exceeds the enumeration cap");
  }
  const ModelFamily model = build_autologistic(config.spec);
  const int d = config.spec.d, l = config.spec.l, n = config.n;

  Dataset data;
  data.response_dim = d;
  data.covariate_dim = l;
  data.covariates.resize(n, l);
  data.responses.resize(n);

  Rng rng(seed);
  const auto num = model.num_states();
  Eigen::VectorXd logf(num), t(model.param_dim);

  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd x(l);
    for (int c = 0; c < l; ++c) {
      switch (config.cov_gen) {
        case CovariateGenerator::Fixed:
          x(c) = config.fixed_covariates(i % config.fixed_covariates.rows(), c);
          break;
        case CovariateGenerator::UniformBox:
          x(c) = config.cov_lo + rng.uniform() * (config.cov_hi - config.cov_lo);
          break;
        case CovariateGenerator::NormalClipped:
          x(c) = std::clamp(rng.normal(), -3.0, 3.0);
          break;
      }
    }
    data.covariates.row(i) = x;

    for (std::uint64_t y = 0; y < num; ++y) {
      model.suff_stat_fn(x, static_cast<State>(y), t);
      logf(y) = config.theta0.dot(t);
    }
    const double shift = logf.maxCoeff();
    const Eigen::VectorXd w = (logf.array() - shift).exp();
    const double total = w.sum();
    const double u = rng.uniform() * total;
    double acc = 0.0;
    State drawn = static_cast<State>(num - 1);
    for (std::uint64_t y = 0; y < num; ++y) {
      acc += w(y);
      if (u < acc) {
        drawn = static_cast<State>(y);
        break;
      }
    }
    data.responses[i] = drawn;
  }
  return data;
}

FitResult fit_dataset(const ModelFamily& model, const ExperimentConfig& config,
                      const Dataset& data, std::uint64_t chain_seed) {
  if (config.m < 100) {
    throw std::runtime_error("fit: inference requires m >= 100");
  }
  const Eigen::VectorXd x_ref_fallback =
      data.covariate_dim > 0
          ? Eigen::VectorXd(data.covariates.colwise().mean())
          : Eigen::VectorXd(0);
  const SamplerSpec sspec = make_sampler_spec(config, x_ref_fallback, chain_seed);
  const MonteCarloChain chain = run_chain(model, sspec, config.m);
  const CollapsedChain collapsed(chain);

  ObjectiveBundle bundle = [&](const Eigen::VectorXd& theta, double& value,
                               Eigen::VectorXd& grad, Eigen::MatrixXd& hess) {
    const ObjectiveState s = evaluate_mcml(model, collapsed, data, theta);
    value = s.value;
    grad = s.grad;
    hess = s.hess;
  };

  FitResult out;
  out.chain_seed = chain_seed;
  auto [theta_hat, trace] =
      maximize(bundle, Eigen::VectorXd::Zero(model.param_dim));
  out.theta_hat = theta_hat;
  out.trace = std::move(trace);
  out.cov = estimate_covariance(model, chain, data, out.theta_hat);
  out.intervals = wald_intervals(out.theta_hat, out.cov.sandwich, config.level);
  out.flagged = (out.trace.reason != TermReason::Converged) ||
                !out.cov.d_negative_definite;
  return out;
}

std::string fit_report_json(const FitResult& fit) {
  json report;
  report["theta_hat"] = vector_to_json(fit.theta_hat);
  report["V_hat"] = matrix_to_json(fit.cov.V_hat);
  report["D_hat"] = matrix_to_json(fit.cov.D_hat);
  report["W_hat"] = matrix_to_json(fit.cov.W_hat);
  report["sandwich"] = matrix_to_json(fit.cov.sandwich);
  json intervals = json::array();
  for (const auto& iv : fit.intervals) {
    intervals.push_back(json::array({iv.lo, iv.hi}));
  }
  report["intervals"] = intervals;
  report["n"] = fit.cov.n;
  report["m"] = fit.cov.m;
  report["seed"] = fit.chain_seed;
  report["termination"] = to_string(fit.trace.reason);
  report["flagged"] = fit.flagged;
  if (!fit.trace.diagnostic.empty()) {
    report["diagnostic"] = fit.trace.diagnostic;
  }
  return report.dump(2);
}

namespace {

ReplicationRow one_replication(const ModelFamily& model,
                               const ExperimentConfig& config,
                               std::uint64_t rep_seed,
                               Eigen::MatrixXd* sandwich_out) {
  ReplicationRow row;
  row.seed = rep_seed;
  const int p = model.param_dim;
  row.theta_hat = Eigen::VectorXd::Zero(p);
  row.se = Eigen::VectorXd::Zero(p);
  row.standardized = Eigen::VectorXd::Zero(p);
  row.hit.assign(p, 0);
  if (config.ablate_w) row.hit_ablated.assign(p, 0);

  try {
    const Dataset data = simulate_dataset(config, derive_seed(rep_seed, 0));
    const FitResult fit =
        fit_dataset(model, config, data, derive_seed(rep_seed, 1));
    row.theta_hat = fit.theta_hat;
    row.flagged = fit.flagged;
    *sandwich_out = fit.cov.sandwich;
    for (int j = 0; j < p; ++j) {
      row.se(j) = std::sqrt(std::max(0.0, fit.cov.sandwich(j, j)));
      row.hit[j] = (fit.intervals[j].lo <= config.theta0(j) &&
                    config.theta0(j) <= fit.intervals[j].hi)
                       ? 1
                       : 0;
    }
    if (config.ablate_w && fit.cov.d_negative_definite) {
      const Eigen::MatrixXd ablated = sandwich_cov(
          fit.cov.V_hat, fit.cov.D_hat,
          Eigen::MatrixXd::Zero(p, p), fit.cov.n, fit.cov.m);
      const auto ivs = wald_intervals(fit.theta_hat, ablated, config.level);
      for (int j = 0; j < p; ++j) {
        row.hit_ablated[j] = (ivs[j].lo <= config.theta0(j) &&
                              config.theta0(j) <= ivs[j].hi)
                                 ? 1
                                 : 0;
      }
    }

    // standardized estimate (V/n + W/m)^{-1/2} D (theta_hat - theta0)
    const Eigen::MatrixXd meat =
        fit.cov.V_hat / double(fit.cov.n) + fit.cov.W_hat / double(fit.cov.m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(meat);
    if (eig.eigenvalues().minCoeff() > 0.0) {
      const Eigen::MatrixXd inv_sqrt =
          eig.eigenvectors() *
          eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
          eig.eigenvectors().transpose();
      row.standardized =
          inv_sqrt * fit.cov.D_hat * (fit.theta_hat - config.theta0);
    } else {
      row.flagged = true;
    }
  } catch (const std::exception&) {
    row.flagged = true;
  }
  return row;
}

}  // namespace

CoverageReport run_coverage(const ExperimentConfig& config) {
  config.validate();
  const ModelFamily model = build_autologistic(config.spec);
  const int p = model.param_dim;
  const int reps = config.replications;

  CoverageReport report;
  report.rows.resize(reps);
  std::vector<Eigen::MatrixXd> sandwiches(reps, Eigen::MatrixXd::Zero(p, p));

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= reps) return;
      report.rows[r] = one_replication(model, config,
                                       derive_seed(config.seed, r),
                                       &sandwiches[r]);
    }
  };
  const int nthreads = std::min(config.workers, reps);
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // aggregate over unflagged rows, in replication order
  report.coverage = Eigen::VectorXd::Zero(p);
  report.coverage_ablated = Eigen::VectorXd::Zero(p);
  report.mean_sandwich = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd mean_theta = Eigen::VectorXd::Zero(p);
  int used = 0;
  for (int r = 0; r < reps; ++r) {
    const auto& row = report.rows[r];
    if (row.flagged) {
      ++report.flagged_rows;
      continue;
    }
    ++used;
    mean_theta += row.theta_hat;
    report.mean_sandwich += sandwiches[r];
    for (int j = 0; j < p; ++j) {
      report.coverage(j) += row.hit[j];
      if (config.ablate_w) report.coverage_ablated(j) += row.hit_ablated[j];
    }
  }
  if (used > 0) {
    report.coverage /= used;
    report.coverage_ablated /= used;
    report.mean_sandwich /= used;
    mean_theta /= used;
  }
  report.empirical_cov = Eigen::MatrixXd::Zero(p, p);
  if (used > 1) {
    for (int r = 0; r < reps; ++r) {
      const auto& row = report.rows[r];
      if (row.flagged) continue;
      const Eigen::VectorXd diff = row.theta_hat - mean_theta;
      report.empirical_cov += diff * diff.transpose();
    }
    report.empirical_cov /= (used - 1);
  }
  return report;
}

void write_coverage_csv(const CoverageReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  if (report.rows.empty()) return;
  const int p = static_cast<int>(report.rows[0].theta_hat.size());
  const bool ablated = !report.rows[0].hit_ablated.empty();

  out << "rep,seed,flagged";
  for (int j = 1; j <= p; ++j) out << ",theta_" << j;
  for (int j = 1; j <= p; ++j) out << ",hit_" << j;
  if (ablated) {
    for (int j = 1; j <= p; ++j) out << ",hit_w0_" << j;
  }
  for (int j = 1; j <= p; ++j) out << ",se_" << j;
  for (int j = 1; j <= p; ++j) out << ",std_" << j;
  out << "\n";

  char buf[64];
  for (size_t r = 0; r < report.rows.size(); ++r) {
    const auto& row = report.rows[r];
    out << (r + 1) << ',' << row.seed << ',' << (row.flagged ? 1 : 0);
    for (int j = 0; j < p; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", row.theta_hat(j));
      out << ',' << buf;
    }
    for (int j = 0; j < p; ++j) out << ',' << row.hit[j];
    if (ablated) {
      for (int j = 0; j < p; ++j) out << ',' << row.hit_ablated[j];
    }
    for (int j = 0; j < p; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", row.se(j));
      out << ',' << buf;
    }
    for (int j = 0; j < p; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", row.standardized(j));
      out << ',' << buf;
    }
    out << "\n";
  }
}

std::string coverage_summary_json(const CoverageReport& report,
                                  const ExperimentConfig& config) {
  json summary;
  summary["R"] = config.replications;
  summary["n"] = config.n;
  summary["m"] = config.m;
  summary["level"] = config.level;
  summary["seed"] = config.seed;
  summary["flagged_rows"] = report.flagged_rows;
  summary["coverage"] = vector_to_json(report.coverage);
  if (config.ablate_w) {
    summary["coverage_w_ablated"] = vector_to_json(report.coverage_ablated);
  }
  summary["empirical_cov"] = matrix_to_json(report.empirical_cov);
  summary["mean_sandwich"] = matrix_to_json(report.mean_sandwich);
  return summary.dump(2);
}

DiagnoseResult run_diagnose(const ExperimentConfig& config,
                            const std::string& out_dir) {
  config.validate();
  const ModelFamily model = build_autologistic(config.spec);
  const SamplerSpec sspec =
      make_sampler_spec(config, generator_mean(config), config.seed);

  DiagnoseResult result;
  const std::string sep = out_dir.empty() ? "" : "/";

  if (config.spec.d <= kKernelCap) {
    result.analysis = build_kernel_analysis(
        model, sspec, Eigen::VectorXd(),
        config.plain_systematic
            ? KernelVariant::PlainSystematicNoSymmetrization
            : KernelVariant::AsImplemented);
    const auto& a = result.analysis;
    result.stationarity_err =
        (a.pi.transpose() * a.P - a.pi.transpose()).cwiseAbs().maxCoeff();
    const Eigen::MatrixXd flow = a.pi.asDiagonal() * a.P;
    result.reversibility_err = (flow - flow.transpose()).cwiseAbs().maxCoeff();

    // Lemma-1 sweep: random centered test functions, all lags up to 20
    Rng rng(derive_seed(config.seed, 0xD1A6));
    std::ofstream lemma_csv;
    if (!out_dir.empty()) {
      lemma_csv.open(out_dir + sep + "lemma_sweep.csv");
      lemma_csv << "g_index,k,l,lhs,rhs,holds\n";
    }
    char buf[160];
    for (int gi = 0; gi < 100; ++gi) {
      Eigen::VectorXd raw(a.pi.size());
      for (int y = 0; y < raw.size(); ++y) raw(y) = rng.normal();
      const TestFunction g = TestFunction::centered(raw, a.pi);
      for (int k : {1, 2, 5}) {
        for (int lag = 0; lag <= 20; ++lag) {
          const auto check = lemma_bound_check(a, g, k, k + lag);
          ++result.lemma_cases;
          if (!check.holds) ++result.lemma_failures;
          if (lemma_csv.is_open()) {
            std::snprintf(buf, sizeof(buf), "%d,%d,%d,%.17g,%.17g,%d\n", gi, k,
                          k + lag, check.lhs, check.rhs, check.holds ? 1 : 0);
            lemma_csv << buf;
          }
        }
      }
    }
    if (!out_dir.empty()) {
      std::ofstream kernel_csv(out_dir + sep + "kernel.csv");
      kernel_csv << "stationarity_err,reversibility_err,rho,sup_ratio\n";
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n",
                    result.stationarity_err, result.reversibility_err, a.rho,
                    a.sup_ratio);
      kernel_csv << buf;
    }
  }

  if (config.h_mode == HMode::ExactDensity &&
      config.spec.d <= kEnumerationCap) {
    std::vector<MonteCarloChain> chains;
    for (size_t i = 0; i < config.a7_m.size(); ++i) {
      SamplerSpec cs = sspec;
      cs.seed = derive_seed(config.seed, 0xA700 + i);
      chains.push_back(run_chain(model, cs, config.a7_m[i]));
    }
    std::vector<Eigen::VectorXd> grid;
    if (config.spec.l == 0) {
      grid.push_back(Eigen::VectorXd(0));
    } else {
      for (int gpt = 0; gpt < config.a7_grid; ++gpt) {
        const double frac =
            config.a7_grid > 1 ? double(gpt) / (config.a7_grid - 1) : 0.5;
        grid.push_back(Eigen::VectorXd::Constant(
            config.spec.l, config.cov_lo + frac * (config.cov_hi - config.cov_lo)));
      }
    }
    result.a7 = assumption7_report(model, chains, grid, config.theta0,
                                   config.a7_radius);
    if (!out_dir.empty()) {
      write_assumption7_csv(result.a7, out_dir + sep + "assumption7.csv");
    }
  }
  return result;
}

}  // namespace mcml

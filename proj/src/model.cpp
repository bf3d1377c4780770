#include "mcml/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mcml {

void ModelFamily::check_args(const Eigen::VectorXd* x, const State* y,
                             const Eigen::VectorXd* theta) const {
  if (x && x->size() != covariate_dim) {
    throw std::invalid_argument(
        "x: expected dimension " + std::to_string(covariate_dim) + ", got " +
        std::to_string(x->size()));
  }
  if (y && response_dim < 32 && (*y >> response_dim) != 0) {
    throw std::invalid_argument(
        "y: state has bits set above response dimension " +
        std::to_string(response_dim));
  }
  if (theta && theta->size() != param_dim) {
    throw std::invalid_argument(
        "theta: expected dimension " + std::to_string(param_dim) + ", got " +
        std::to_string(theta->size()));
  }
}

Eigen::VectorXd ModelFamily::suff_stat(const Eigen::VectorXd& x,
                                       State y) const {
  check_args(&x, &y, nullptr);
  Eigen::VectorXd out(param_dim);
  suff_stat_fn(x, y, out);
  return out;
}

double ModelFamily::unnorm_logf(const Eigen::VectorXd& x, State y,
                                const Eigen::VectorXd& theta) const {
  check_args(&x, &y, &theta);
  Eigen::VectorXd t(param_dim);
  suff_stat_fn(x, y, t);
  return theta.dot(t);
}

void Dataset::validate() const {
  if (n() < 1) throw std::invalid_argument("dataset: n must be >= 1");
  if (covariates.rows() != n() || covariates.cols() != covariate_dim) {
    throw std::invalid_argument("dataset: covariate matrix shape mismatch");
  }
  for (State y : responses) {
    if (response_dim < 32 && (y >> response_dim) != 0) {
      throw std::invalid_argument("dataset: response outside {0,1}^d");
    }
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);

  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error(path + ": empty file, expected header row");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split_csv_line(line);

  int d = 0, l = 0;
  for (size_t c = 0; c < header.size(); ++c) {
    const std::string& name = header[c];
    if (name.rfind("y_", 0) == 0) {
      if (l > 0) {
        throw std::runtime_error(path + ": header column " +
                                 std::to_string(c + 1) +
                                 ": y column after x columns");
      }
      ++d;
    } else if (name.rfind("x_", 0) == 0) {
      ++l;
    } else {
      throw std::runtime_error(path + ": header column " +
                               std::to_string(c + 1) + ": unexpected name '" +
                               name + "'");
    }
  }
  if (d < 1) throw std::runtime_error(path + ": no y_ columns in header");
  if (d > 31) throw std::runtime_error(path + ": d > 31 unsupported");

  Dataset data;
  data.response_dim = d;
  data.covariate_dim = l;
  std::vector<Eigen::VectorXd> xs;

  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != d + l) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected " + std::to_string(d + l) +
                               " fields, got " + std::to_string(fields.size()));
    }
    State y = 0;
    for (int c = 0; c < d; ++c) {
      const std::string& f = fields[c];
      if (f == "1") {
        y |= (State{1} << c);
      } else if (f != "0") {
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": column " + std::to_string(c + 1) +
                                 ": y value must be 0 or 1, got '" + f + "'");
      }
    }
    Eigen::VectorXd x(l);
    for (int c = 0; c < l; ++c) {
      try {
        size_t pos = 0;
        x(c) = std::stod(fields[d + c], &pos);
        if (pos != fields[d + c].size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": column " + std::to_string(d + c + 1) +
                                 ": bad numeric value '" + fields[d + c] + "'");
      }
      if (!std::isfinite(x(c))) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": column " + std::to_string(d + c + 1) +
                                 ": non-finite covariate");
      }
    }
    data.responses.push_back(y);
    xs.push_back(std::move(x));
  }
  if (data.responses.empty()) {
    throw std::runtime_error(path + ": no data rows");
  }
  data.covariates.resize(data.n(), l);
  for (int i = 0; i < data.n(); ++i) data.covariates.row(i) = xs[i];
  return data;
}

void write_dataset_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset file: " + path);
  for (int c = 0; c < data.response_dim; ++c) {
    out << (c ? "," : "") << "y_" << (c + 1);
  }
  for (int c = 0; c < data.covariate_dim; ++c) out << ",x_" << (c + 1);
  out << "\n";
  char buf[64];
  for (int i = 0; i < data.n(); ++i) {
    for (int c = 0; c < data.response_dim; ++c) {
      out << (c ? "," : "") << bit(data.responses[i], c);
    }
    for (int c = 0; c < data.covariate_dim; ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", data.covariates(i, c));
      out << ',' << buf;
    }
    out << "\n";
  }
}

}  // namespace mcml

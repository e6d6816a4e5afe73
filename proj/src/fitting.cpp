#include "sivfs/fitting.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sivfs {

double FitResult::param(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return params[i];
  }
  throw std::invalid_argument("unknown fit parameter '" + name + "'");
}

double FitResult::uncertainty(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return uncertainties[i];
  }
  throw std::invalid_argument("unknown fit parameter '" + name + "'");
}

bool FitResult::has_flag(const std::string& flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

std::string fit_result_to_json(const FitResult& result) {
  nlohmann::json doc;
  nlohmann::json params = nlohmann::json::object();
  nlohmann::json sigmas = nlohmann::json::object();
  for (std::size_t i = 0; i < result.names.size(); ++i) {
    params[result.names[i]] = result.params[i];
    sigmas[result.names[i]] = result.uncertainties[i];
  }
  doc["params"] = params;
  doc["uncertainties"] = sigmas;
  doc["residual_norm"] = result.residual_norm;
  doc["converged"] = result.converged;
  doc["iterations"] = result.iterations;
  doc["flags"] = result.flags;
  return doc.dump(2);
}

namespace {

Eigen::VectorXd clamp_to_bounds(Eigen::VectorXd p, const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  if (lower.size() == p.size()) p = p.cwiseMax(lower);
  if (upper.size() == p.size()) p = p.cwiseMin(upper);
  return p;
}

}  // namespace

Eigen::MatrixXd numeric_jacobian(const ResidualFn& residual, const Eigen::VectorXd& p) {
  const Eigen::VectorXd r0 = residual(p);
  Eigen::MatrixXd jac(r0.size(), p.size());
  for (int j = 0; j < p.size(); ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(p(j)));
    Eigen::VectorXd plus = p, minus = p;
    plus(j) += h;
    minus(j) -= h;
    jac.col(j) = (residual(plus) - residual(minus)) / (2.0 * h);
  }
  return jac;
}

FitResult lm_fit(const LmProblem& problem, const Eigen::VectorXd& init, const std::vector<std::string>& names,
                 const LmOptions& options) {
  if (!problem.residual) throw std::invalid_argument("lm_fit: residual function required");
  if (static_cast<int>(names.size()) != init.size()) {
    throw std::invalid_argument("lm_fit: one name per parameter required");
  }
  for (int i = 0; i < init.size(); ++i) {
    if (!std::isfinite(init(i))) throw std::invalid_argument("lm_fit: initial parameters must be finite");
  }

  const auto jacobian = [&problem](const Eigen::VectorXd& p) {
    return problem.jacobian ? problem.jacobian(p) : numeric_jacobian(problem.residual, p);
  };

  Eigen::VectorXd p = clamp_to_bounds(init, problem.lower, problem.upper);
  Eigen::VectorXd r = problem.residual(p);
  const int n_residuals = static_cast<int>(r.size());
  if (n_residuals < init.size()) {
    throw std::invalid_argument("lm_fit: need at least as many residuals as parameters");
  }
  double chi2 = r.squaredNorm();

  FitResult result;
  result.names = names;

  double mu = -1.0;  // initialized from the first Jacobian
  double nu = 2.0;
  bool converged = false;
  int iteration = 0;

  Eigen::MatrixXd jac = jacobian(p);
  for (; iteration < options.max_iterations; ++iteration) {
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd gradient = jac.transpose() * r;
    if (gradient.lpNorm<Eigen::Infinity>() <= options.gradient_tol) {
      converged = true;
      break;
    }
    if (mu < 0.0) mu = 1e-6 * std::max(jtj.diagonal().maxCoeff(), 1e-12);

    Eigen::MatrixXd damped = jtj;
    damped.diagonal() += mu * jtj.diagonal().cwiseMax(1e-12);
    const Eigen::VectorXd step = damped.ldlt().solve(-gradient);
    if (!step.allFinite()) {
      mu *= nu;
      nu *= 2.0;
      continue;
    }

    const Eigen::VectorXd candidate = clamp_to_bounds(p + step, problem.lower, problem.upper);
    const Eigen::VectorXd r_new = problem.residual(candidate);
    const double chi2_new = r_new.squaredNorm();
    const double predicted = step.dot(mu * jtj.diagonal().cwiseMax(1e-12).asDiagonal() * step - gradient);
    const double rho = predicted > 0.0 ? (chi2 - chi2_new) / predicted : (chi2 - chi2_new);

    if (chi2_new < chi2) {
      const double drop = chi2 - chi2_new;
      p = candidate;
      r = r_new;
      chi2 = chi2_new;
      jac = jacobian(p);
      mu *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
      nu = 2.0;
      if (drop <= options.relative_residual_tol * std::max(chi2, 1e-300)) {
        converged = true;
        ++iteration;
        break;
      }
    } else {
      mu *= nu;
      nu *= 2.0;
      if (mu > 1e16) break;  // damping exhausted
    }
  }

  result.params.assign(p.data(), p.data() + p.size());
  result.residual_norm = chi2;
  result.converged = converged;
  result.iterations = iteration;

  // Linearized covariance scaled by reduced chi-square.
  result.uncertainties.assign(static_cast<std::size_t>(p.size()), 0.0);
  const int dof = n_residuals - static_cast<int>(p.size());
  const Eigen::MatrixXd jtj = jac.transpose() * jac;
  const Eigen::MatrixXd cov = jtj.completeOrthogonalDecomposition().pseudoInverse();
  const double chi2_red = dof > 0 ? chi2 / dof : 1.0;
  for (int i = 0; i < p.size(); ++i) {
    const double var = cov(i, i) * chi2_red;
    result.uncertainties[static_cast<std::size_t>(i)] = var > 0.0 ? std::sqrt(var) : 0.0;
  }
  return result;
}

DataSeries read_series_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open data file: " + path);

  DataSeries series;
  std::string line;
  bool first = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 2) throw std::invalid_argument(path + ": line " + std::to_string(line_no) + " needs x,y");
    if (first) {
      first = false;
      char* end = nullptr;
      std::strtod(cells[0].c_str(), &end);
      if (end == cells[0].c_str()) continue;  // header row
    }
    try {
      series.x.push_back(std::stod(cells[0]));
      series.y.push_back(std::stod(cells[1]));
      if (cells.size() >= 3 && !cells[2].empty()) series.sigma.push_back(std::stod(cells[2]));
    } catch (const std::exception&) {
      throw std::invalid_argument(path + ": line " + std::to_string(line_no) + " is not numeric");
    }
  }
  if (!series.sigma.empty() && series.sigma.size() != series.x.size()) {
    throw std::invalid_argument(path + ": sigma column must cover every row");
  }
  if (series.x.empty()) throw std::invalid_argument(path + ": no data rows");
  return series;
}

void write_series_csv(const std::string& path, const DataSeries& series, const std::string& header) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out.precision(12);
    out << header << "\n";
    for (std::size_t i = 0; i < series.x.size(); ++i) {
      out << series.x[i] << ',' << series.y[i];
      if (!series.sigma.empty()) out << ',' << series.sigma[i];
      out << "\n";
    }
  }
  std::rename(tmp.c_str(), path.c_str());
}

FitResult fit_curve(const ModelFn& model, const DataSeries& data, const Eigen::VectorXd& init,
                    const std::vector<std::string>& names, const LmOptions& options, const ModelGradFn& gradient,
                    const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  if (data.size() < static_cast<std::size_t>(init.size())) {
    throw std::invalid_argument("fit_curve: need at least as many points as parameters");
  }

  LmProblem problem;
  problem.lower = lower;
  problem.upper = upper;
  problem.residual = [&model, &data](const Eigen::VectorXd& p) {
    Eigen::VectorXd r(static_cast<int>(data.size()));
    for (std::size_t i = 0; i < data.size(); ++i) {
      r(static_cast<int>(i)) = (model(data.x[i], p) - data.y[i]) * data.weight(i);
    }
    return r;
  };
  if (gradient) {
    problem.jacobian = [&gradient, &data](const Eigen::VectorXd& p) {
      Eigen::MatrixXd jac(static_cast<int>(data.size()), p.size());
      for (std::size_t i = 0; i < data.size(); ++i) {
        jac.row(static_cast<int>(i)) = gradient(data.x[i], p).transpose() * data.weight(i);
      }
      return jac;
    };
  }
  return lm_fit(problem, init, names, options);
}

}  // namespace sivfs

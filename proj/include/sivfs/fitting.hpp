#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace sivfs {

struct FitResult {
  std::vector<std::string> names;
  std::vector<double> params;
  std::vector<double> uncertainties;  // linearized covariance scaled by reduced chi-square
  double residual_norm = 0.0;         // sum of squared weighted residuals
  bool converged = false;
  int iterations = 0;
  std::vector<std::string> flags;

  double param(const std::string& name) const;
  double uncertainty(const std::string& name) const;
  bool has_flag(const std::string& flag) const;
};

std::string fit_result_to_json(const FitResult& result);

struct LmOptions {
  int max_iterations = 200;
  double relative_residual_tol = 1e-10;
  double gradient_tol = 1e-8;
};

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using JacobianFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

struct LmProblem {
  ResidualFn residual;
  JacobianFn jacobian;      // optional; central differences otherwise
  Eigen::VectorXd lower;    // optional box bounds, empty = unbounded
  Eigen::VectorXd upper;
};

// Damped least squares with a trust-region style damping update. Steps are
// accepted only when they reduce the residual norm, so the reported norm is
// non-increasing over accepted iterations. Non-convergence within
// max_iterations is reported, best parameters retained.
FitResult lm_fit(const LmProblem& problem, const Eigen::VectorXd& init, const std::vector<std::string>& names,
                 const LmOptions& options = {});

Eigen::MatrixXd numeric_jacobian(const ResidualFn& residual, const Eigen::VectorXd& p);

// Two-column data series with optional per-point sigma used as weights.
struct DataSeries {
  std::vector<double> x, y, sigma;

  std::size_t size() const { return x.size(); }
  double weight(std::size_t i) const { return sigma.empty() ? 1.0 : 1.0 / sigma[i]; }
};

DataSeries read_series_csv(const std::string& path);
void write_series_csv(const std::string& path, const DataSeries& series, const std::string& header);

using ModelFn = std::function<double(double x, const Eigen::VectorXd& params)>;
// Per-point parameter gradient; same calling convention as ModelFn.
using ModelGradFn = std::function<Eigen::VectorXd(double x, const Eigen::VectorXd& params)>;

FitResult fit_curve(const ModelFn& model, const DataSeries& data, const Eigen::VectorXd& init,
                    const std::vector<std::string>& names, const LmOptions& options = {},
                    const ModelGradFn& gradient = nullptr, const Eigen::VectorXd& lower = {},
                    const Eigen::VectorXd& upper = {});

}  // namespace sivfs

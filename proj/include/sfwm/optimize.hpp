#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace sfwm {

struct NelderMeadOptions {
  int max_iterations = 2000;     // per run
  double rel_tolerance = 1e-10;  // on the spread of simplex values
  int restarts = 3;              // seeded random restarts around the best point
  std::uint64_t seed = 1;
  double initial_step = 0.1;  // relative simplex size (absolute when a coordinate is 0)
};

struct MinimizeResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;  // best value after each iteration, all runs concatenated
};

using Objective = std::function<double(std::span<const double>)>;

/// Derivative-free simplex minimization with restarts. Restarts are merged by
/// lowest value, ties going to the earliest run. Non-finite objective values
/// are treated as +inf, which is how callers express parameter bounds.
MinimizeResult minimize(const Objective& f, std::vector<double> x0, const NelderMeadOptions& opts = {});

/// model(params) -> predictions, one per data point.
using ModelFn = std::function<std::vector<double>(std::span<const double>)>;

struct LeastSquaresResult {
  std::vector<double> params;
  double residual = 0.0;  // weighted sum of squared residuals
  Eigen::MatrixXd covariance;
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;
};

double weighted_ssr(std::span<const double> prediction, std::span<const double> data,
                    std::span<const double> weights);

/// Covariance approximation 2 H^-1 s^2 from a central-difference Hessian of
/// the weighted SSR, s^2 = SSR / (n - k). Pseudo-inverse when singular.
Eigen::MatrixXd covariance_from_hessian(const Objective& ssr, std::span<const double> at,
                                        std::size_t n_data);

/// Minimizes sum w_i (data_i - model_i)^2. Empty weights mean uniform.
LeastSquaresResult least_squares(const ModelFn& model, std::vector<double> params0,
                                 std::span<const double> data, std::span<const double> weights = {},
                                 const NelderMeadOptions& opts = {});

}  // namespace sfwm

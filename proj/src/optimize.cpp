#include "sfwm/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "sfwm/errors.hpp"

namespace sfwm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_eval(const Objective& f, std::span<const double> x) {
  const double v = f(x);
  return std::isfinite(v) ? v : kInf;
}

struct RunResult {
  std::vector<double> x;
  double value;
  int iterations;
  bool converged;
};

// Standard coefficients: reflection 1, expansion 2, contraction 1/2, shrink 1/2.
RunResult nelder_mead(const Objective& f, const std::vector<double>& x0, double f0,
                      const std::vector<double>& steps, int max_iter, double rel_tol,
                      std::vector<double>& history) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> simplex(n + 1, x0);
  std::vector<double> fv(n + 1, f0);
  for (std::size_t i = 0; i < n; ++i) {
    simplex[i + 1][i] += steps[i];
    fv[i + 1] = safe_eval(f, simplex[i + 1]);
  }

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), trial(n), trial2(n);
  int iter = 0;
  bool converged = false;
  for (; iter < max_iter; ++iter) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return fv[a] < fv[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];

    const double spread = fv[worst] - fv[best];
    double diameter = 0.0, scale = 0.0;
    for (std::size_t i = 0; i <= n; ++i)
      for (std::size_t d = 0; d < n; ++d) {
        diameter = std::max(diameter, std::abs(simplex[i][d] - simplex[best][d]));
        scale = std::max(scale, std::abs(simplex[best][d]));
      }
    if ((std::isfinite(spread) && spread <= rel_tol * std::abs(fv[best])) ||
        diameter <= 1e-14 * std::max(scale, 1e-300) || fv[best] == 0.0) {
      converged = true;
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= n; ++i)
      if (i != worst)
        for (std::size_t d = 0; d < n; ++d) centroid[d] += simplex[i][d] / static_cast<double>(n);

    auto along = [&](double t, std::vector<double>& out) {
      for (std::size_t d = 0; d < n; ++d) out[d] = centroid[d] + t * (simplex[worst][d] - centroid[d]);
    };

    along(-1.0, trial);
    const double fr = safe_eval(f, trial);
    if (fr < fv[best]) {
      along(-2.0, trial2);
      const double fe = safe_eval(f, trial2);
      if (fe < fr) {
        simplex[worst] = trial2;
        fv[worst] = fe;
      } else {
        simplex[worst] = trial;
        fv[worst] = fr;
      }
    } else if (fr < fv[second]) {
      simplex[worst] = trial;
      fv[worst] = fr;
    } else {
      const bool outside = fr < fv[worst];
      along(outside ? -0.5 : 0.5, trial2);
      const double fc = safe_eval(f, trial2);
      if (fc < (outside ? fr : fv[worst])) {
        simplex[worst] = trial2;
        fv[worst] = fc;
      } else {
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == best) continue;
          for (std::size_t d = 0; d < n; ++d)
            simplex[i][d] = simplex[best][d] + 0.5 * (simplex[i][d] - simplex[best][d]);
          fv[i] = safe_eval(f, simplex[i]);
        }
      }
    }
    history.push_back(*std::min_element(fv.begin(), fv.end()));
  }

  const auto best = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
  return {simplex[best], fv[best], iter, converged};
}

std::vector<double> initial_steps(const std::vector<double>& x, double rel) {
  std::vector<double> s(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) s[i] = x[i] != 0.0 ? rel * std::abs(x[i]) : rel;
  return s;
}

}  // namespace

MinimizeResult minimize(const Objective& f, std::vector<double> x0, const NelderMeadOptions& opts) {
  if (x0.empty()) throw DataError("minimize: empty parameter vector");
  for (double v : x0)
    if (!std::isfinite(v)) throw DataError("minimize: non-finite initial point");

  MinimizeResult out;
  const double f0 = safe_eval(f, x0);
  if (f0 == 0.0) {
    out.x = std::move(x0);
    out.value = 0.0;
    out.converged = true;
    return out;
  }
  if (!std::isfinite(f0)) throw DataError("minimize: objective is not finite at the initial point");

  auto run = nelder_mead(f, x0, f0, initial_steps(x0, opts.initial_step), opts.max_iterations,
                         opts.rel_tolerance, out.history);
  out.x = run.x;
  out.value = run.value;
  out.iterations = run.iterations;
  out.converged = run.converged;

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int r = 0; r < opts.restarts; ++r) {
    std::vector<double> start = out.x;
    const auto steps = initial_steps(start, opts.initial_step);
    for (std::size_t d = 0; d < start.size(); ++d) start[d] += 0.5 * steps[d] * unit(rng);
    double fs = safe_eval(f, start);
    if (!std::isfinite(fs) || fs > out.value) {
      start = out.x;
      fs = out.value;
    }
    // History is kept monotone across runs: a restart never reports worse than the best so far.
    std::vector<double> hist;
    auto rr = nelder_mead(f, start, fs, steps, opts.max_iterations, opts.rel_tolerance, hist);
    for (double h : hist) out.history.push_back(std::min(h, out.value));
    out.iterations += rr.iterations;
    if (rr.value < out.value) {
      out.x = rr.x;
      out.value = rr.value;
      out.converged = rr.converged;
    } else {
      out.converged = out.converged || rr.converged;
    }
  }
  return out;
}

double weighted_ssr(std::span<const double> prediction, std::span<const double> data,
                    std::span<const double> weights) {
  if (prediction.size() != data.size()) return kInf;
  double acc = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double r = data[i] - prediction[i];
    acc += (weights.empty() ? 1.0 : weights[i]) * r * r;
  }
  return acc;
}

Eigen::MatrixXd covariance_from_hessian(const Objective& ssr, std::span<const double> at,
                                        std::size_t n_data) {
  const std::size_t k = at.size();
  std::vector<double> x(at.begin(), at.end());
  std::vector<double> h(k);
  for (std::size_t i = 0; i < k; ++i) h[i] = 1e-4 * std::max(std::abs(x[i]), 1e-3);

  auto eval = [&](std::size_t i, double di, std::size_t j, double dj) {
    std::vector<double> y = x;
    y[i] += di;
    y[j] += dj;
    return ssr(y);
  };
  const double f0 = ssr(x);
  Eigen::MatrixXd hess(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    hess(i, i) = (eval(i, h[i], i, 0.0) - 2.0 * f0 + eval(i, -h[i], i, 0.0)) / (h[i] * h[i]);
    for (std::size_t j = i + 1; j < k; ++j) {
      const double v = (eval(i, h[i], j, h[j]) - eval(i, h[i], j, -h[j]) - eval(i, -h[i], j, h[j]) +
                        eval(i, -h[i], j, -h[j])) /
                       (4.0 * h[i] * h[j]);
      hess(i, j) = hess(j, i) = v;
    }
  }
  const double dof = n_data > k ? static_cast<double>(n_data - k) : 1.0;
  const double s2 = f0 / dof;
  return 2.0 * s2 * hess.completeOrthogonalDecomposition().pseudoInverse();
}

LeastSquaresResult least_squares(const ModelFn& model, std::vector<double> params0,
                                 std::span<const double> data, std::span<const double> weights,
                                 const NelderMeadOptions& opts) {
  if (!weights.empty() && weights.size() != data.size())
    throw DataError("least_squares: weights and data differ in length");
  const Objective ssr = [&](std::span<const double> p) {
    const auto pred = model(p);
    return weighted_ssr(pred, data, weights);
  };
  auto mr = minimize(ssr, std::move(params0), opts);
  LeastSquaresResult out;
  out.params = mr.x;
  out.residual = mr.value;
  out.iterations = mr.iterations;
  out.converged = mr.converged;
  out.history = std::move(mr.history);
  out.covariance = covariance_from_hessian(ssr, out.params, data.size());
  return out;
}

}  // namespace sfwm

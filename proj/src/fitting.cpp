#include "sfwm/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sfwm/csv.hpp"
#include "sfwm/errors.hpp"

namespace sfwm {

void ParallelSpectra::validate() const {
  const auto n = omega.size();
  if (counts_v.size() != n || counts_h.size() != n)
    throw DataError("V and H channels must share the detuning grid");
  if ((!stderr_v.empty() && stderr_v.size() != n) || (!stderr_h.empty() && stderr_h.size() != n))
    throw DataError("standard-error columns must match the grid");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(omega[i])) throw DataError("non-finite detuning");
    if (!(counts_v[i] >= 0.0) || !(counts_h[i] >= 0.0)) throw DataError("negative counts");
  }
}

ParallelSpectra ParallelSpectra::read_csv(const std::string& path) {
  const auto t = csv::read_file(path);
  ParallelSpectra s;
  s.omega = t.column("omega_cm");
  s.counts_v = t.column("counts_v");
  s.counts_h = t.column("counts_h");
  if (t.has("stderr_v")) s.stderr_v = t.column("stderr_v");
  if (t.has("stderr_h")) s.stderr_h = t.column("stderr_h");
  s.validate();
  return s;
}

std::vector<double> fit_setup_response(std::span<const double> omega, std::span<const double> counts_v,
                                       int degree, SpectralWindow window) {
  if (degree < 0) throw DataError("polynomial degree must be >= 0");
  if (omega.size() != counts_v.size()) throw DataError("omega and counts differ in length");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < omega.size(); ++i)
    if (omega[i] >= window.lo && omega[i] <= window.hi && std::isfinite(counts_v[i])) {
      xs.push_back(omega[i]);
      ys.push_back(counts_v[i]);
    }
  const auto k = static_cast<std::size_t>(degree) + 1;
  if (xs.size() < k) throw RankDeficientError("fewer valid bins than polynomial coefficients");

  // Centre and scale the abscissa for conditioning, then expand back.
  const auto [mn, mx] = std::minmax_element(xs.begin(), xs.end());
  const double centre = 0.5 * (*mn + *mx);
  const double half = std::max(0.5 * (*mx - *mn), 1e-12);
  Eigen::MatrixXd a(xs.size(), k);
  Eigen::VectorXd y(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double u = (xs[i] - centre) / half;
    double pw = 1.0;
    for (std::size_t j = 0; j < k; ++j, pw *= u) a(i, j) = pw;
    y(i) = ys[i];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < static_cast<Eigen::Index>(k))
    throw RankDeficientError("design matrix is rank deficient");
  const Eigen::VectorXd cu = qr.solve(y);

  // p(x) = sum_j cu_j ((x - centre)/half)^j expanded in powers of x.
  std::vector<double> coeffs(k, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    double binom = 1.0;
    for (std::size_t m = 0; m <= j; ++m) {
      // term: cu_j / half^j * C(j,m) x^m (-centre)^(j-m)
      coeffs[m] += cu(j) / std::pow(half, static_cast<double>(j)) * binom *
                   std::pow(-centre, static_cast<double>(j - m));
      binom = binom * static_cast<double>(j - m) / static_cast<double>(m + 1);
    }
  }
  return coeffs;
}

namespace {

constexpr double kModelMargin = 400.0;  // cm^-1 beyond the data on each side
constexpr double kMaxSigma = 75.0;      // keeps 5 sigma inside the margin

SpectralSeries intensity_hvvh(double lo, double hi, double step, const SusceptibilityParams& p) {
  const auto grid = UniformGrid::covering(lo - kModelMargin, hi + kModelMargin, step);
  SpectralSeries s{grid, std::vector<double>(grid.size), {}, 0};
  for (std::size_t i = 0; i < grid.size; ++i) s.values[i] = std::norm(chi_hvvh(Wavenumber{grid.at(i)}, p));
  return s;
}

std::vector<double> log_convolved(std::span<const double> omega, const SusceptibilityParams& p,
                                  double sigma_g, double step) {
  const auto [mn, mx] = std::minmax_element(omega.begin(), omega.end());
  const auto series = intensity_hvvh(*mn, *mx, step, p);
  const auto kernel = gaussian_kernel(sigma_g, step);
  auto conv = convolve_sampled(series, kernel, omega);
  for (auto& v : conv) {
    if (!(v > 0.0)) throw NegativeLogArgumentError("convolved intensity is not positive");
    v = std::log10(v);
  }
  return conv;
}

struct LinearFit {
  double a, b, ssr;
};

// Weighted regression y ~ a x + b.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y, std::span<const double> w) {
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
    sxx += w[i] * x[i] * x[i];
    sxy += w[i] * x[i] * y[i];
  }
  const double det = sw * sxx - sx * sx;
  LinearFit f{0.0, sw > 0 ? sy / sw : 0.0, 0.0};
  if (std::abs(det) > 1e-300 * std::max(1.0, sw * sxx)) {
    f.a = (sw * sxy - sx * sy) / det;
    f.b = (sy - f.a * sx) / sw;
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.a * x[i] + f.b);
    f.ssr += w[i] * r * r;
  }
  return f;
}

}  // namespace

std::vector<double> h_log_model(std::span<const double> omega, const SusceptibilityParams& p, double delta,
                                double sigma_g, double a, double b, double model_step) {
  if (omega.empty()) return {};
  SusceptibilityParams q = p;
  q.delta = delta;
  auto v = log_convolved(omega, q, sigma_g, model_step);
  for (auto& x : v) x = a * x + b;
  return v;
}

FitResult fit_h_spectrum(const ParallelSpectra& spectra, const SusceptibilityParams& p0,
                         const InstrumentResponse& initial, const HFitOptions& opts) {
  spectra.validate();
  p0.validate();
  if (!(opts.window.hi > opts.window.lo)) throw DataError("empty fit window");

  FitResult out;
  out.window = opts.window;
  out.response_poly =
      fit_setup_response(spectra.omega, spectra.counts_v, opts.response_degree, opts.window);

  std::vector<double> omega, y, w;
  for (std::size_t i = 0; i < spectra.omega.size(); ++i) {
    const double x = spectra.omega[i];
    if (x < opts.window.lo || x > opts.window.hi) continue;
    const double resp = eval_poly(out.response_poly, x);
    if (!(resp > 0.0)) throw DataError("setup response is not positive inside the fit window");
    if (!(spectra.counts_h[i] > 0.0)) throw DataError("fit window contains non-positive H counts");
    omega.push_back(x);
    y.push_back(spectra.counts_h[i] / resp);
    double wt = 1.0;
    if (opts.weights == FitWeights::InverseVariance) {
      const double se = spectra.stderr_h.empty() ? std::sqrt(spectra.counts_h[i]) : spectra.stderr_h[i];
      if (!(se > 0.0)) throw DataError("non-positive standard error with inverse-variance weights");
      wt = 1.0 / ((se / resp) * (se / resp));
    }
    w.push_back(wt);
  }
  if (omega.size() < 5) throw DataError("fewer than 5 bins inside the fit window");

  SusceptibilityParams p = p0;
  // Profiled SSR over (delta, sigma_g); A and b are solved linearly.
  auto profiled = [&](double delta, double sigma) -> LinearFit {
    p.delta = delta;
    const auto x = log_convolved(omega, p, sigma, opts.model_step);
    return linear_fit(x, y, w);
  };
  const Objective objective = [&](std::span<const double> q) {
    if (!(q[0] > 0.0) || !(q[1] > 0.0) || q[1] > kMaxSigma) return std::numeric_limits<double>::infinity();
    return profiled(q[0], q[1]).ssr;
  };

  auto mr = minimize(objective, {p0.delta, initial.sigma_g}, opts.optimizer);
  if (!std::isfinite(mr.value))
    throw ConvergenceError("fit failed: no finite residual reached", mr.x);
  if (!mr.converged)
    throw ConvergenceError("fit did not converge within the iteration limit", mr.x);

  const auto lin = profiled(mr.x[0], mr.x[1]);
  out.delta = mr.x[0];
  out.sigma_g = mr.x[1];
  out.a = lin.a;
  out.b = lin.b;
  out.residual_norm = lin.ssr;
  out.iterations = mr.iterations;
  out.converged = mr.converged;
  out.history = std::move(mr.history);

  const Objective full = [&](std::span<const double> q) {
    if (!(q[0] > 0.0) || !(q[1] > 0.0)) return std::numeric_limits<double>::infinity();
    p.delta = q[0];
    const auto x = log_convolved(omega, p, q[1], opts.model_step);
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - (q[2] * x[i] + q[3]);
      acc += w[i] * r * r;
    }
    return acc;
  };
  const std::array<double, 4> best{out.delta, out.sigma_g, out.a, out.b};
  const Eigen::MatrixXd cov = covariance_from_hessian(full, best, omega.size());
  out.covariance = cov;

  // No log-structure detected: the resonance parameters are not identifiable.
  const double scale = std::max(std::abs(out.b), 1e-300);
  const double sigma_a = std::sqrt(std::max(cov(2, 2), 0.0));
  if (std::abs(out.a) <= 1e-9 * scale || std::abs(out.a) <= 3.0 * sigma_a)
    throw UnidentifiableError("flat likelihood: no resonance signature in the data (A = " +
                                  csv::format(out.a) + " +/- " + csv::format(sigma_a) + ")",
                              {out.delta, out.sigma_g, out.a, out.b});
  return out;
}

double reference_band_stddev(std::span<const double> omega, std::span<const double> counts,
                             SpectralWindow band) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < omega.size(); ++i)
    if (omega[i] >= band.lo && omega[i] <= band.hi) sum += counts[i], ++n;
  if (n < 2) throw DataError("reference band holds fewer than 2 bins");
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < omega.size(); ++i)
    if (omega[i] >= band.lo && omega[i] <= band.hi) ss += (counts[i] - mean) * (counts[i] - mean);
  return std::sqrt(ss / static_cast<double>(n - 1));
}

ValueWithError probability_with_error(const FourCounts& n, const FourSigmas& sigma) {
  const double p = normalized_probability(n);
  const double total = n.total();
  // dP/dn_0 = (1 - P)/N, dP/dn_k = -P/N.
  const std::array<double, 4> grad{(1.0 - p) / total, -p / total, -p / total, -p / total};
  double var = 0.0;
  for (std::size_t k = 0; k < 4; ++k) var += grad[k] * grad[k] * sigma[k] * sigma[k];
  return {p, std::sqrt(var)};
}

ValueWithError correlation_with_error(const FourCounts& n, const FourSigmas& sigma) {
  const double e = correlation_E(n);
  const double total = n.total();
  // dE/dn_k = (s_k - E)/N with s = (+1, +1, -1, -1).
  const std::array<double, 4> s{1.0, 1.0, -1.0, -1.0};
  double var = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    const double g = (s[k] - e) / total;
    var += g * g * sigma[k] * sigma[k];
  }
  return {e, std::sqrt(var)};
}

ValueWithError chsh_with_error(std::span<const ValueWithError, 4> e, BellVariant variant) {
  const std::array<double, 4> vals{e[0].value, e[1].value, e[2].value, e[3].value};
  double var = 0.0;
  for (const auto& x : e) var += x.std_error * x.std_error;
  return {chsh_combine(vals, variant), std::sqrt(var)};
}

}  // namespace sfwm

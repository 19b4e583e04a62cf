#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sfwm/biphoton.hpp"
#include "sfwm/chi3.hpp"
#include "sfwm/instrument.hpp"
#include "sfwm/optimize.hpp"

namespace sfwm {

/// Coincidence spectra after parallel V/V and H/H polarizers.
struct ParallelSpectra {
  std::vector<double> omega;  // cm^-1
  std::vector<double> counts_v;
  std::vector<double> counts_h;
  std::vector<double> stderr_v;  // empty: Poisson sqrt(counts)
  std::vector<double> stderr_h;

  void validate() const;
  static ParallelSpectra read_csv(const std::string& path);  // omega_cm,counts_v,counts_h
};

struct SpectralWindow {
  double lo = 900.0;
  double hi = 1700.0;
};

/// Least-squares polynomial (ascending coefficients) through the V channel,
/// restricted to `window`. Throws RankDeficientError with too few bins.
std::vector<double> fit_setup_response(std::span<const double> omega, std::span<const double> counts_v,
                                       int degree, SpectralWindow window = {-1e300, 1e300});

enum class FitWeights { Uniform, InverseVariance };

struct HFitOptions {
  SpectralWindow window;
  int response_degree = 3;
  FitWeights weights = FitWeights::Uniform;
  double model_step = 0.5;  // cm^-1, grid of the convolved model
  NelderMeadOptions optimizer;
};

struct FitResult {
  double delta = 0.0;
  double sigma_g = 0.0;
  double a = 0.0;
  double b = 0.0;
  std::vector<double> response_poly;
  double residual_norm = 0.0;  // weighted SSR in the log domain
  Eigen::Matrix4d covariance = Eigen::Matrix4d::Zero();  // (delta, sigma_g, A, b), approximate
  SpectralWindow window;
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;
};

/// A log10(|chi_HVVH|^2 * G) + b at `omega`. Throws NegativeLogArgumentError
/// if the convolved intensity is not positive.
std::vector<double> h_log_model(std::span<const double> omega, const SusceptibilityParams& p,
                                double delta, double sigma_g, double a, double b, double model_step = 0.5);

/// Fits A log10(|chi_HVVH|^2 * G) + b to counts_h / response over the window.
/// Delta and sigma_g are searched by the simplex; A and b are solved in
/// closed form at each step. The starting point is p0.delta and
/// initial.sigma_g. Throws UnidentifiableError when the data carry no
/// resonance signature and ConvergenceError when the optimizer fails.
FitResult fit_h_spectrum(const ParallelSpectra& spectra, const SusceptibilityParams& p0,
                         const InstrumentResponse& initial, const HFitOptions& opts = {});

/// Sample standard deviation of counts whose omega lies in [lo, hi].
double reference_band_stddev(std::span<const double> omega, std::span<const double> counts,
                             SpectralWindow band = {630.0, 890.0});

struct ValueWithError {
  double value = 0.0;
  double std_error = 0.0;
};

/// Four counts and their standard errors in FourCounts order.
using FourSigmas = std::array<double, 4>;

/// Linear propagation of count errors through the normalized probability.
ValueWithError probability_with_error(const FourCounts& n, const FourSigmas& sigma);

/// Linear propagation of count errors through E.
ValueWithError correlation_with_error(const FourCounts& n, const FourSigmas& sigma);

/// S and its error from four independent correlation parameters.
ValueWithError chsh_with_error(std::span<const ValueWithError, 4> e, BellVariant variant);

}  // namespace sfwm

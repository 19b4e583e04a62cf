#pragma once

#include <span>
#include <vector>

#include "sfwm/spectral.hpp"

namespace sfwm {

/// Finite spectral resolution (pump bandwidth and detector jitter combined)
/// and the polarization-independent spectral transmission of the setup.
struct InstrumentResponse {
  double sigma_g = 24.80;                   // Gaussian std, cm^-1
  std::vector<double> response_poly{1.0};  // ascending powers of w (cm^-1)

  void validate() const;
};

/// Horner evaluation, coefficients in ascending order.
double eval_poly(std::span<const double> coeffs, double x);

inline constexpr double kKernelHalfWidthSigmas = 5.0;

/// Normalized discrete Gaussian sampled on `grid` and centred on its middle
/// sample (zero lag). The grid must have an odd number of points and span at
/// least 8 sigma; throws GridError otherwise.
SpectralSeries gaussian_kernel(double sigma_g, const UniformGrid& grid);

/// Kernel on lags -K..K * step with K = ceil(half_width_sigmas * sigma / step).
SpectralSeries gaussian_kernel(double sigma_g, double step,
                               double half_width_sigmas = kKernelHalfWidthSigmas);

/// Discrete linear convolution returned on the series grid, zero padded
/// outside it. The kernel must be odd-sized with the same step; samples
/// within one kernel half-width of either end are marked as guard.
SpectralSeries convolve(const SpectralSeries& series, const SpectralSeries& kernel);

/// Convolution evaluated at a single sample of the series grid.
double convolve_at(const SpectralSeries& series, const SpectralSeries& kernel, std::size_t index);

/// Convolution evaluated at arbitrary positions by linear interpolation
/// between neighbouring grid samples.
std::vector<double> convolve_sampled(const SpectralSeries& series, const SpectralSeries& kernel,
                                     std::span<const double> omegas);

/// Pointwise product with the response polynomial.
SpectralSeries apply_response(const SpectralSeries& series, std::span<const double> response_poly);

/// Convolution with the instrument Gaussian at the series' own step.
SpectralSeries smear(const SpectralSeries& series, const InstrumentResponse& instrument);

}  // namespace sfwm

#include "sfwm/instrument.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sfwm/errors.hpp"

namespace sfwm {

void InstrumentResponse::validate() const {
  if (!(std::isfinite(sigma_g) && sigma_g > 0.0)) throw DataError("sigma_g must be > 0");
  if (response_poly.empty()) throw DataError("response polynomial is empty");
}

double eval_poly(std::span<const double> coeffs, double x) {
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
  return acc;
}

SpectralSeries gaussian_kernel(double sigma_g, const UniformGrid& grid) {
  if (!(sigma_g > 0.0)) throw GridError("kernel width must be > 0");
  if (grid.size % 2 == 0) throw GridError("kernel grid must have an odd number of samples");
  if (grid.span() < 8.0 * sigma_g)
    throw GridError("kernel grid span " + std::to_string(grid.span()) + " is below 8 sigma");

  SpectralSeries k;
  k.grid = grid;
  k.values.resize(grid.size);
  const std::size_t centre = grid.size / 2;
  double sum = 0.0;
  for (std::size_t i = 0; i < grid.size; ++i) {
    const double lag = grid.step * (static_cast<double>(i) - static_cast<double>(centre));
    k.values[i] = std::exp(-0.5 * lag * lag / (sigma_g * sigma_g));
    sum += k.values[i];
  }
  for (auto& v : k.values) v /= sum;
  return k;
}

SpectralSeries gaussian_kernel(double sigma_g, double step, double half_width_sigmas) {
  if (!(step > 0.0)) throw GridError("kernel step must be > 0");
  const auto half = static_cast<std::size_t>(std::ceil(half_width_sigmas * sigma_g / step));
  const auto n = 2 * std::max<std::size_t>(half, 1) + 1;
  return gaussian_kernel(sigma_g, UniformGrid{-step * static_cast<double>(n / 2), step, n});
}

namespace {

void check_compatible(const SpectralSeries& series, const SpectralSeries& kernel) {
  if (kernel.size() % 2 == 0) throw GridError("kernel must have an odd number of samples");
  const double rel = std::abs(series.grid.step - kernel.grid.step) / series.grid.step;
  if (rel > 1e-9) throw GridError("series and kernel have different grid steps");
}

}  // namespace

double convolve_at(const SpectralSeries& series, const SpectralSeries& kernel, std::size_t index) {
  const auto n = static_cast<std::ptrdiff_t>(series.size());
  const auto half = static_cast<std::ptrdiff_t>(kernel.size() / 2);
  const auto i = static_cast<std::ptrdiff_t>(index);
  const std::ptrdiff_t jlo = std::max<std::ptrdiff_t>(0, i - half);
  const std::ptrdiff_t jhi = std::min<std::ptrdiff_t>(n - 1, i + half);
  double acc = 0.0;
  for (std::ptrdiff_t j = jlo; j <= jhi; ++j) acc += series.values[j] * kernel.values[i - j + half];
  return acc;
}

SpectralSeries convolve(const SpectralSeries& series, const SpectralSeries& kernel) {
  check_compatible(series, kernel);
  SpectralSeries out;
  out.grid = series.grid;
  out.values.resize(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) out.values[i] = convolve_at(series, kernel, i);
  out.guard = std::max(series.guard, kernel.size() / 2);
  return out;
}

std::vector<double> convolve_sampled(const SpectralSeries& series, const SpectralSeries& kernel,
                                     std::span<const double> omegas) {
  check_compatible(series, kernel);
  if (series.size() < 2) throw GridError("series too short for interpolation");
  std::vector<double> out;
  out.reserve(omegas.size());
  const double last = static_cast<double>(series.size() - 1);
  for (double w : omegas) {
    const double pos = (w - series.grid.start) / series.grid.step;
    if (pos < 0.0 || pos > last) throw GridError("sample position outside the model grid");
    auto i0 = static_cast<std::size_t>(std::floor(pos));
    if (i0 + 1 >= series.size()) i0 = series.size() - 2;
    const double t = pos - static_cast<double>(i0);
    const double a = convolve_at(series, kernel, i0);
    const double b = t > 0.0 ? convolve_at(series, kernel, i0 + 1) : a;
    out.push_back(a + t * (b - a));
  }
  return out;
}

SpectralSeries apply_response(const SpectralSeries& series, std::span<const double> response_poly) {
  SpectralSeries out = series;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double r = eval_poly(response_poly, out.omega(i));
    out.values[i] *= r;
    if (!out.std_error.empty()) out.std_error[i] *= std::abs(r);
  }
  return out;
}

SpectralSeries smear(const SpectralSeries& series, const InstrumentResponse& instrument) {
  instrument.validate();
  return convolve(series, gaussian_kernel(instrument.sigma_g, series.grid.step));
}

}  // namespace sfwm

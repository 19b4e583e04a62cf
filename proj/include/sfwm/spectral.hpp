#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "sfwm/errors.hpp"

namespace sfwm {

/// Uniform sampling of the detuning axis, in cm^-1.
struct UniformGrid {
  double start = 0.0;
  double step = 0.5;
  std::size_t size = 0;

  double at(std::size_t i) const { return start + step * static_cast<double>(i); }
  double back() const { return at(size == 0 ? 0 : size - 1); }
  double span() const { return size < 2 ? 0.0 : step * static_cast<double>(size - 1); }

  std::vector<double> points() const {
    std::vector<double> out(size);
    for (std::size_t i = 0; i < size; ++i) out[i] = at(i);
    return out;
  }

  // Grid covering [lo, hi] inclusive; hi is rounded to the nearest step.
  static UniformGrid covering(double lo, double hi, double step) {
    if (!(step > 0.0) || !(hi >= lo)) throw GridError("invalid grid bounds or step");
    const auto n = static_cast<std::size_t>(std::llround((hi - lo) / step)) + 1;
    return {lo, step, n};
  }
};

/// Values sampled on a UniformGrid. `guard` samples at each end are outside
/// the valid region (e.g. affected by convolution zero padding).
struct SpectralSeries {
  UniformGrid grid;
  std::vector<double> values;
  std::vector<double> std_error;  // empty when not available
  std::size_t guard = 0;

  std::size_t size() const { return values.size(); }
  double omega(std::size_t i) const { return grid.at(i); }
  bool valid(std::size_t i) const { return i >= guard && i + guard < values.size(); }
};

}  // namespace sfwm

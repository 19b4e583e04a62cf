#pragma once

#include <span>
#include <string>
#include <vector>

#include "sfwm/units.hpp"

namespace sfwm {

/// Chromatic dispersion D(lambda) sampled on a strictly increasing grid.
struct DispersionTable {
  std::vector<double> lambda_nm;
  std::vector<double> d_ps_per_nm_km;

  void validate() const;
  double at(double lambda_nm) const;  // linear interpolation, throws OutOfBandError
  static DispersionTable read_csv(const std::string& path);  // lambda_nm,D_ps_per_nm_km
  static DispersionTable constant(double d, double lo_nm, double hi_nm);
};

struct WavelengthBand {
  double lo_nm = 0.0;
  double hi_nm = 0.0;
  bool contains(double lambda_nm) const { return lambda_nm >= lo_nm && lambda_nm <= hi_nm; }
};

class FiberSpec {
 public:
  FiberSpec(double length_m, DispersionTable table, WavelengthBand band);

  double length_m() const { return length_m_; }
  const DispersionTable& table() const { return table_; }
  const WavelengthBand& band() const { return band_; }

  /// Group delay relative to the lower band edge, ps. Trapezoidal integral of
  /// L D(lambda) on the table grid. Throws OutOfBandError outside the band.
  double arrival_time_ps(double lambda_nm) const;
  double arrival_time_ps(Wavenumber absolute) const;
  double arrival_time_ps(AngularFrequency absolute) const;

 private:
  double length_m_;
  DispersionTable table_;
  WavelengthBand band_;
  std::vector<double> cumulative_;  // integral of D from lambda_nm[0], ps/km
};

/// T_C(w) = T_S(nu_p - w) - T_A(nu_p + w) for detuning w (cm^-1) and absolute
/// pump wavenumber nu_p.
double coincidence_time_ps(Wavenumber detuning, const FiberSpec& stokes, const FiberSpec& antistokes,
                           Wavenumber pump);
double coincidence_time_ps(Wavenumber detuning, const FiberSpec& stokes, const FiberSpec& antistokes,
                           AngularFrequency pump);

/// T_fit(w) = a + b (pump_cm - w)^2, a quadratic in the absolute Stokes
/// wavenumber. With pump_cm = 0 this is a + b w^2 in the detuning itself.
struct CalibrationFit {
  double a_ps = 0.0;
  double b = 0.0;  // ps / (cm^-1)^2
  double pump_cm = 0.0;
  double raman_anchor_shift_ps = 0.0;
  double rms_residual_ps = 0.0;

  double time_ps(Wavenumber detuning) const;  // without the anchor shift
};

struct TimeSample {
  double w;     // detuning, cm^-1
  double t_ps;  // coincidence time
};

/// Linear least squares of t against (pump_cm - w)^2.
CalibrationFit fit_quadratic(std::span<const TimeSample> samples, double pump_cm = 0.0);

/// Samples T_C on [lo, hi] at `step` and fits the quadratic against the
/// pump's absolute wavenumber.
CalibrationFit calibrate_fibers(const FiberSpec& stokes, const FiberSpec& antistokes, Wavenumber pump,
                                double lo = 400.0, double hi = 2200.0, double step = 10.0);

/// Inverse of the calibration after adding the anchor shift to t. The root
/// below pump_cm is taken. Throws NegativeRadicandError when (t - a)/b < 0.
Wavenumber invert_time_to_wavenumber(double t_ps, const CalibrationFit& cal);

struct TimeHistogram {
  std::vector<double> time_ps;  // bin centres, increasing
  std::vector<double> counts;

  void validate() const;
  static TimeHistogram read_csv(const std::string& path);  // time_ps,counts
};

inline constexpr double kRamanAnchorCm = 1332.0;

/// Centroid of the contiguous bins at or above half the maximum. Throws
/// NoPeakError when max/median < 5 or another region reaches half the max.
double locate_peak_ps(const TimeHistogram& hist);

/// Returns `cal` with the anchor shift that maps the histogram peak to
/// `target` cm^-1.
CalibrationFit anchor_to_raman(const TimeHistogram& hist, CalibrationFit cal,
                               Wavenumber target = Wavenumber{kRamanAnchorCm});

}  // namespace sfwm

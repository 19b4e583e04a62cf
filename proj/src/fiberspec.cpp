#include "sfwm/fiberspec.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "sfwm/csv.hpp"
#include "sfwm/errors.hpp"

namespace sfwm {

namespace {

// L [m] * D [ps/(nm km)] * dlambda [nm] -> ps.
constexpr double kKmPerM = 1e-3;

std::string fmt(double x) { return csv::format(x); }

}  // namespace

void DispersionTable::validate() const {
  if (lambda_nm.size() != d_ps_per_nm_km.size()) throw DataError("dispersion table columns differ in length");
  if (lambda_nm.size() < 2) throw DataError("dispersion table needs at least 2 points");
  for (std::size_t i = 0; i < lambda_nm.size(); ++i) {
    if (!std::isfinite(lambda_nm[i]) || !std::isfinite(d_ps_per_nm_km[i]))
      throw DataError("non-finite dispersion table entry");
    if (i > 0 && !(lambda_nm[i] > lambda_nm[i - 1]))
      throw DataError("dispersion table wavelengths must be strictly increasing");
  }
}

double DispersionTable::at(double lam) const {
  if (!(lam >= lambda_nm.front() && lam <= lambda_nm.back()))
    throw OutOfBandError("wavelength " + fmt(lam) + " nm outside the dispersion table");
  auto it = std::upper_bound(lambda_nm.begin(), lambda_nm.end(), lam);
  std::size_t j = std::min<std::size_t>(static_cast<std::size_t>(it - lambda_nm.begin()), lambda_nm.size() - 1);
  const std::size_t i = j - 1;
  const double u = (lam - lambda_nm[i]) / (lambda_nm[j] - lambda_nm[i]);
  return d_ps_per_nm_km[i] + u * (d_ps_per_nm_km[j] - d_ps_per_nm_km[i]);
}

DispersionTable DispersionTable::read_csv(const std::string& path) {
  const auto t = csv::read_file(path);
  DispersionTable d{t.column("lambda_nm"), t.column("D_ps_per_nm_km")};
  d.validate();
  return d;
}

DispersionTable DispersionTable::constant(double d, double lo_nm, double hi_nm) {
  DispersionTable t{{lo_nm, hi_nm}, {d, d}};
  t.validate();
  return t;
}

FiberSpec::FiberSpec(double length_m, DispersionTable table, WavelengthBand band)
    : length_m_(length_m), table_(std::move(table)), band_(band) {
  if (!(length_m_ >= 0.0) || !std::isfinite(length_m_)) throw DataError("fibre length must be >= 0");
  table_.validate();
  if (!(band_.hi_nm > band_.lo_nm)) throw DataError("fibre band is empty");
  if (band_.lo_nm < table_.lambda_nm.front() || band_.hi_nm > table_.lambda_nm.back())
    throw DataError("dispersion table does not cover the fibre band [" + fmt(band_.lo_nm) + ", " +
                    fmt(band_.hi_nm) + "] nm");
  const auto& x = table_.lambda_nm;
  const auto& d = table_.d_ps_per_nm_km;
  cumulative_.assign(x.size(), 0.0);
  for (std::size_t i = 1; i < x.size(); ++i)
    cumulative_[i] = cumulative_[i - 1] + 0.5 * (d[i] + d[i - 1]) * (x[i] - x[i - 1]);
}

double FiberSpec::arrival_time_ps(double lam) const {
  if (!band_.contains(lam))
    throw OutOfBandError("wavelength " + fmt(lam) + " nm outside fibre band [" + fmt(band_.lo_nm) + ", " +
                         fmt(band_.hi_nm) + "] nm");
  // Integral from the table start to lam, by trapezoid on the partial interval.
  auto integral_to = [&](double l) {
    const auto& x = table_.lambda_nm;
    auto it = std::upper_bound(x.begin(), x.end(), l);
    std::size_t i = static_cast<std::size_t>(it - x.begin());
    i = std::clamp<std::size_t>(i, 1, x.size() - 1) - 1;
    return cumulative_[i] + 0.5 * (table_.d_ps_per_nm_km[i] + table_.at(l)) * (l - x[i]);
  };
  return length_m_ * kKmPerM * (integral_to(lam) - integral_to(band_.lo_nm));
}

double FiberSpec::arrival_time_ps(Wavenumber absolute) const {
  if (!(absolute.value > 0.0)) throw OutOfBandError("absolute wavenumber must be positive");
  return arrival_time_ps(cm_to_wavelength_nm(absolute));
}

double FiberSpec::arrival_time_ps(AngularFrequency absolute) const {
  return arrival_time_ps(angular_to_cm(absolute));
}

double coincidence_time_ps(Wavenumber w, const FiberSpec& stokes, const FiberSpec& antistokes, Wavenumber pump) {
  return stokes.arrival_time_ps(Wavenumber{pump.value - w.value}) -
         antistokes.arrival_time_ps(Wavenumber{pump.value + w.value});
}

double coincidence_time_ps(Wavenumber w, const FiberSpec& stokes, const FiberSpec& antistokes,
                           AngularFrequency pump) {
  return coincidence_time_ps(w, stokes, antistokes, angular_to_cm(pump));
}

double CalibrationFit::time_ps(Wavenumber w) const {
  const double x = pump_cm - w.value;
  return a_ps + b * x * x;
}

CalibrationFit fit_quadratic(std::span<const TimeSample> samples, double pump_cm) {
  if (samples.size() < 2) throw RankDeficientError("calibration needs at least 2 samples");
  Eigen::MatrixXd a(samples.size(), 2);
  Eigen::VectorXd y(samples.size());
  // Scale the quadratic column for conditioning.
  double scale = 0.0;
  for (const auto& s : samples) scale = std::max(scale, (pump_cm - s.w) * (pump_cm - s.w));
  if (!(scale > 0.0)) throw RankDeficientError("calibration samples carry no frequency spread");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double x = pump_cm - samples[i].w;
    a(static_cast<Eigen::Index>(i), 0) = 1.0;
    a(static_cast<Eigen::Index>(i), 1) = x * x / scale;
    y(static_cast<Eigen::Index>(i)) = samples[i].t_ps;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < 2) throw RankDeficientError("calibration samples carry no frequency spread");
  const Eigen::VectorXd c = qr.solve(y);
  CalibrationFit fit;
  fit.a_ps = c(0);
  fit.b = c(1) / scale;
  fit.pump_cm = pump_cm;
  double ss = 0.0;
  for (const auto& s : samples) {
    const double r = s.t_ps - fit.time_ps(Wavenumber{s.w});
    ss += r * r;
  }
  fit.rms_residual_ps = std::sqrt(ss / static_cast<double>(samples.size()));
  return fit;
}

CalibrationFit calibrate_fibers(const FiberSpec& stokes, const FiberSpec& antistokes, Wavenumber pump,
                                double lo, double hi, double step) {
  if (!(hi > lo) || !(step > 0.0)) throw DataError("empty calibration band");
  std::vector<TimeSample> s;
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) {
    const double w = lo + static_cast<double>(i) * step;
    s.push_back({w, coincidence_time_ps(Wavenumber{w}, stokes, antistokes, pump)});
  }
  return fit_quadratic(s, pump.value);
}

Wavenumber invert_time_to_wavenumber(double t_ps, const CalibrationFit& cal) {
  if (cal.b == 0.0) throw NegativeRadicandError("calibration curvature is zero");
  const double r = (t_ps + cal.raman_anchor_shift_ps - cal.a_ps) / cal.b;
  if (r < 0.0)
    throw NegativeRadicandError("time " + fmt(t_ps) + " ps lies outside the calibrated range");
  return Wavenumber{cal.pump_cm > 0.0 ? cal.pump_cm - std::sqrt(r) : std::sqrt(r)};
}

void TimeHistogram::validate() const {
  if (time_ps.size() != counts.size()) throw DataError("time histogram columns differ in length");
  if (time_ps.size() < 3) throw DataError("time histogram needs at least 3 bins");
  for (std::size_t i = 0; i < time_ps.size(); ++i) {
    if (!std::isfinite(time_ps[i]) || !(counts[i] >= 0.0)) throw DataError("invalid time histogram entry");
    if (i > 0 && !(time_ps[i] > time_ps[i - 1])) throw DataError("time bins must be increasing");
  }
}

TimeHistogram TimeHistogram::read_csv(const std::string& path) {
  const auto t = csv::read_file(path);
  TimeHistogram h{t.column("time_ps"), t.column("counts")};
  h.validate();
  return h;
}

double locate_peak_ps(const TimeHistogram& hist) {
  hist.validate();
  const auto& c = hist.counts;
  const auto imax = static_cast<std::size_t>(std::max_element(c.begin(), c.end()) - c.begin());
  const double peak = c[imax];
  std::vector<double> sorted = c;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
  const double median = sorted[sorted.size() / 2];
  if (!(peak > 0.0) || peak < 5.0 * median)
    throw NoPeakError("histogram has no dominant peak (max/median = " + fmt(median > 0 ? peak / median : 0.0) +
                      ")");
  const double half = 0.5 * peak;
  std::size_t lo = imax, hi = imax;
  while (lo > 0 && c[lo - 1] >= half) --lo;
  while (hi + 1 < c.size() && c[hi + 1] >= half) ++hi;
  for (std::size_t i = 0; i < c.size(); ++i)
    if ((i < lo || i > hi) && c[i] >= half) throw NoPeakError("histogram has more than one peak region");
  double sw = 0.0, st = 0.0;
  for (std::size_t i = lo; i <= hi; ++i) {
    sw += c[i];
    st += c[i] * hist.time_ps[i];
  }
  return st / sw;
}

CalibrationFit anchor_to_raman(const TimeHistogram& hist, CalibrationFit cal, Wavenumber target) {
  cal.raman_anchor_shift_ps = cal.time_ps(target) - locate_peak_ps(hist);
  return cal;
}

}  // namespace sfwm

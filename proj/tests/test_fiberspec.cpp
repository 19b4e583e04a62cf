#include <catch_amalgamated.hpp>

#include <cmath>

#include "sfwm/errors.hpp"
#include "sfwm/fiberspec.hpp"
#include "support.hpp"

using namespace sfwm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

FiberSpec constant_fiber(double length, double d) {
  return FiberSpec(length, DispersionTable::constant(d, 600.0, 1000.0), {600.0, 1000.0});
}

// Gaussian peak in time centred at `t0`.
TimeHistogram peak_histogram(double t0, double lo, double hi, double width = 20.0) {
  TimeHistogram h;
  for (double t = lo; t <= hi; t += 1.0) {
    h.time_ps.push_back(t);
    h.counts.push_back(5.0 + 1000.0 * std::exp(-0.5 * std::pow((t - t0) / width, 2)));
  }
  return h;
}

}  // namespace

TEST_CASE("dispersion table validation") {
  CHECK_THROWS_AS((DispersionTable{{800.0}, {1.0}}.validate()), DataError);
  CHECK_THROWS_AS((DispersionTable{{800.0, 700.0}, {1.0, 2.0}}.validate()), DataError);
  const auto t = DispersionTable::read_csv(SFWM_DATA_DIR "/fiber_780hp.csv");
  CHECK_NOTHROW(t.validate());
  CHECK(t.lambda_nm.front() <= 780.0);
  CHECK(t.lambda_nm.back() >= 970.0);
  CHECK_THROWS_AS(FiberSpec(1.0, t, {700.0, 900.0}), DataError);
}

TEST_CASE("arrival time basics") {
  const auto zero = constant_fiber(0.0, -100.0);
  for (double lam : {650.0, 800.0, 990.0}) CHECK(zero.arrival_time_ps(lam) == 0.0);

  // dT = D L dlambda with D in ps/(nm km): 100 m at -100 ps/(nm km) gives -10 ps per nm.
  const auto f = constant_fiber(100.0, -100.0);
  CHECK_THAT(f.arrival_time_ps(801.0) - f.arrival_time_ps(800.0), WithinRel(-10.0, 0.01));
  const auto f2 = constant_fiber(200.0, -100.0);
  CHECK_THAT(f2.arrival_time_ps(900.0) - f2.arrival_time_ps(700.0),
             WithinRel(2.0 * (f.arrival_time_ps(900.0) - f.arrival_time_ps(700.0)), 1e-12));
  CHECK_THROWS_AS(f.arrival_time_ps(1200.0), OutOfBandError);
  CHECK_THAT(f.arrival_time_ps(Wavenumber{1.0e7 / 800.0}), WithinRel(f.arrival_time_ps(800.0), 1e-12));
  CHECK_THAT(f.arrival_time_ps(cm_to_angular(Wavenumber{1.0e7 / 800.0})), WithinRel(f.arrival_time_ps(800.0), 1e-9));
}

TEST_CASE("arrival time is monotone for single-sign dispersion") {
  const auto s = test::stokes_fiber();
  double prev = s.arrival_time_ps(780.0);
  for (double lam = 781.0; lam <= 970.0; lam += 1.0) {
    const double t = s.arrival_time_ps(lam);
    CHECK(t < prev);
    prev = t;
  }
}

TEST_CASE("coincidence time") {
  const auto f = constant_fiber(50.0, -80.0);
  CHECK(coincidence_time_ps(Wavenumber{0.0}, f, f, Wavenumber{1.0e7 / 800.0}) == 0.0);

  const auto s = test::stokes_fiber();
  const auto a = test::antistokes_fiber();
  const Wavenumber pump{test::kPumpCm};
  double prev = coincidence_time_ps(Wavenumber{400.0}, s, a, pump);
  for (double w = 401.0; w <= 2200.0; w += 1.0) {
    const double t = coincidence_time_ps(Wavenumber{w}, s, a, pump);
    CHECK(t < prev);
    prev = t;
  }
  CHECK_THAT(coincidence_time_ps(Wavenumber{1000.0}, s, a, cm_to_angular(pump)),
             WithinAbs(coincidence_time_ps(Wavenumber{1000.0}, s, a, pump), 1e-6));

  // The longer Stokes fibre dominates the slope.
  const double h = 1.0;
  const double ds = s.arrival_time_ps(Wavenumber{pump.value - 1001.0}) - s.arrival_time_ps(Wavenumber{pump.value - 999.0});
  const double da = a.arrival_time_ps(Wavenumber{pump.value + 1001.0}) - a.arrival_time_ps(Wavenumber{pump.value + 999.0});
  CHECK(std::abs(ds) > std::abs(da));
  const double dtc = coincidence_time_ps(Wavenumber{1000.0 + h}, s, a, pump) -
                     coincidence_time_ps(Wavenumber{1000.0 - h}, s, a, pump);
  CHECK(std::signbit(dtc) == std::signbit(ds));
}

TEST_CASE("quadratic fit") {
  std::vector<TimeSample> exact;
  for (double w = 400.0; w <= 2200.0; w += 50.0) exact.push_back({w, 12.0 + 3e-4 * w * w});
  const auto c = fit_quadratic(exact);
  CHECK_THAT(c.a_ps, WithinAbs(12.0, 1e-7));
  CHECK_THAT(c.b, WithinRel(3e-4, 1e-10));
  CHECK_THAT(c.rms_residual_ps, WithinAbs(0.0, 1e-7));

  auto shifted = exact;
  for (auto& s : shifted) s.t_ps += 250.0;
  const auto d = fit_quadratic(shifted);
  CHECK_THAT(d.a_ps, WithinAbs(c.a_ps + 250.0, 1e-7));
  CHECK_THAT(d.b, WithinRel(c.b, 1e-10));

  CHECK_THROWS_AS(fit_quadratic(std::vector<TimeSample>{{1.0, 2.0}, {1.0, 3.0}}), RankDeficientError);
}

TEST_CASE("fibre calibration with the example tables") {
  const auto s = test::stokes_fiber();
  const auto a = test::antistokes_fiber();
  const Wavenumber pump{test::kPumpCm};
  const auto cal = calibrate_fibers(s, a, pump);
  CHECK(cal.rms_residual_ps < 30.0);
  double worst = 0.0;
  for (double w = 400.0; w <= 2200.0; w += 5.0) {
    const double t = coincidence_time_ps(Wavenumber{w}, s, a, pump);
    worst = std::max(worst, std::abs(invert_time_to_wavenumber(t, cal).value - w));
  }
  CHECK(worst <= 5.0);
}

TEST_CASE("time to wavenumber inversion") {
  const CalibrationFit detuning_form{100.0, 2e-3, 0.0, 0.0, 0.0};
  CHECK(invert_time_to_wavenumber(100.0, detuning_form).value == 0.0);
  CHECK_THAT(invert_time_to_wavenumber(detuning_form.time_ps(Wavenumber{1332.0}), detuning_form).value,
             WithinAbs(1332.0, 1e-9));
  CHECK_THROWS_AS(invert_time_to_wavenumber(99.0, detuning_form), NegativeRadicandError);

  const CalibrationFit abs_form{-6000.0, 4.5e-5, test::kPumpCm, 0.0, 0.0};
  CHECK_THAT(invert_time_to_wavenumber(abs_form.time_ps(Wavenumber{0.0}), abs_form).value, WithinAbs(0.0, 1e-9));
  CHECK_THAT(invert_time_to_wavenumber(abs_form.time_ps(Wavenumber{1332.0}), abs_form).value, WithinAbs(1332.0, 1e-9));
}

TEST_CASE("Raman anchoring") {
  const CalibrationFit cal{100.0, 2e-3, 0.0, 0.0, 0.0};
  const double t_raman = cal.time_ps(Wavenumber{1332.0});
  const auto centred = anchor_to_raman(peak_histogram(t_raman, t_raman - 500.0, t_raman + 500.0), cal);
  CHECK_THAT(centred.raman_anchor_shift_ps, WithinAbs(0.0, 1e-6));

  const auto moved = anchor_to_raman(peak_histogram(t_raman + 100.0, t_raman - 500.0, t_raman + 500.0), cal);
  CHECK_THAT(moved.raman_anchor_shift_ps, WithinAbs(-100.0, 1e-6));
  CHECK_THAT(invert_time_to_wavenumber(t_raman + 100.0, moved).value, WithinAbs(1332.0, 1e-9));

  auto twin = peak_histogram(t_raman - 200.0, t_raman - 500.0, t_raman + 500.0);
  const auto other = peak_histogram(t_raman + 200.0, t_raman - 500.0, t_raman + 500.0);
  for (std::size_t i = 0; i < twin.counts.size(); ++i) twin.counts[i] += other.counts[i] - 5.0;
  CHECK_THROWS_AS(anchor_to_raman(twin, cal), NoPeakError);

  TimeHistogram flat{{0.0, 1.0, 2.0, 3.0}, {10.0, 11.0, 10.0, 12.0}};
  CHECK_THROWS_AS(anchor_to_raman(flat, cal), NoPeakError);
}

TEST_CASE("calibration is shift covariant") {
  const auto s = test::stokes_fiber();
  const auto a = test::antistokes_fiber();
  const Wavenumber pump{test::kPumpCm};
  std::vector<TimeSample> base, shifted;
  for (double w = 400.0; w <= 2200.0; w += 10.0) {
    const double t = coincidence_time_ps(Wavenumber{w}, s, a, pump);
    base.push_back({w, t});
    shifted.push_back({w, t + 321.0});
  }
  const auto c0 = fit_quadratic(base, pump.value);
  const auto c1 = fit_quadratic(shifted, pump.value);
  CHECK_THAT(c1.a_ps - c0.a_ps, WithinAbs(321.0, 1e-6));
  CHECK_THAT(c1.b, WithinRel(c0.b, 1e-9));

  const double tr = c0.time_ps(Wavenumber{1332.0});
  const auto h0 = peak_histogram(tr + 40.0, tr - 600.0, tr + 600.0);
  auto h1 = h0;
  for (auto& t : h1.time_ps) t += 321.0;
  const auto a0 = anchor_to_raman(h0, c0);
  const auto a1 = anchor_to_raman(h1, c1);
  for (double dt : {-300.0, 0.0, 250.0})
    CHECK_THAT(invert_time_to_wavenumber(tr + dt + 321.0, a1).value,
               WithinAbs(invert_time_to_wavenumber(tr + dt, a0).value, 1e-6));
}

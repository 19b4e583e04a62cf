#include <catch_amalgamated.hpp>

#include <random>

#include "sfwm/errors.hpp"
#include "sfwm/waveguide.hpp"

using namespace sfwm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("anisotropy parameter") {
  CHECK(sigma_a(3.0, 1.0) == 0.0);
  CHECK(sigma_a(2.0, 1.25) == 0.75);
  CHECK(sigma_a(1.0, 0.0) == 0.0);
}

TEST_CASE("delta prime") {
  CHECK_THAT(delta_prime(Wavenumber{130.59}, 2.0, 1.25).value, WithinAbs(47.487, 1e-3));
  CHECK(delta_prime(Wavenumber{80.0}, 1.0, 0.0).value == 80.0);
  CHECK_THAT(delta_prime(Wavenumber{261.18}, 2.0, 1.25).value,
             WithinRel(2.0 * delta_prime(Wavenumber{130.59}, 2.0, 1.25).value, 1e-15));
}

TEST_CASE("second form of delta prime") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (int i = 0; i < 200; ++i) {
    const double f = u(rng), fp = u(rng), d = 100.0 * u(rng);
    const double second = 2.0 * d / (f * (sigma_a(f, fp) + 2.0));
    CHECK_THAT(delta_prime(Wavenumber{d}, f, fp).value, WithinRel(second, 1e-12));
  }
}

TEST_CASE("coherence length") {
  WaveguideParams bulk;
  bulk.gvd_d = kBulkDiamondGvdD;
  bulk.pump_wavelength_nm = 781.0;
  const double l = coherence_length(Wavenumber{1332.0}, bulk);
  CHECK(l > 100e-6);
  CHECK(l < 1000e-6);
  CHECK_THAT(coherence_length(Wavenumber{666.0}, bulk), WithinRel(4.0 * l, 1e-12));

  WaveguideParams flat;
  flat.gvd_d = 0.0;
  CHECK(std::isinf(coherence_length(Wavenumber{1332.0}, flat)));
  CHECK_THROWS_AS(coherence_length(Wavenumber{0.0}, bulk), DataError);
}

TEST_CASE("beta2 and gamma closed forms") {
  const WaveguideParams wg;
  const double lam = 800e-9, c = kSpeedOfLight;
  CHECK_THAT(beta2(wg), WithinRel(-500e-6 * lam * lam / (2.0 * kPi * c), 1e-12));
  CHECK_THAT(nonlinear_coefficient(wg), WithinRel(2.0 * kPi * c / lam * 1.23e-19 / (c * 2e-13), 1e-12));
}

TEST_CASE("optimal pump power") {
  const WaveguideParams wg;
  const double p = optimal_pump_power(Wavenumber{1332.0}, wg);
  CHECK_THAT(p, WithinRel(linear_mismatch(Wavenumber{1332.0}, wg) / (2.0 * nonlinear_coefficient(wg)), 1e-15));
  CHECK(p > 100.0);
  CHECK(p < 1e4);
  CHECK(optimal_pump_power(Wavenumber{1250.0}, wg) <= 1000.0);
  WaveguideParams wide = wg;
  wide.a_eff *= 2.0;
  CHECK_THAT(optimal_pump_power(Wavenumber{1332.0}, wide), WithinRel(2.0 * p, 1e-12));
  CHECK_THAT(optimal_pump_power(Wavenumber{666.0}, wg), WithinRel(p / 4.0, 1e-12));
}

TEST_CASE("phase mismatch") {
  WaveguideParams wg;
  const Wavenumber w{1332.0};
  wg.pump_peak_power = optimal_pump_power(w, wg);
  CHECK(std::abs(phase_mismatch(w, wg)) <= 1e-9 * linear_mismatch(w, wg));
  CHECK(effective_coherence_length(w, wg) > 1e3 * coherence_length(w, wg));
  const double popt = wg.pump_peak_power;
  wg.pump_peak_power = 0.0;
  CHECK(phase_mismatch(w, wg) == -linear_mismatch(w, wg));
  CHECK(effective_coherence_length(w, wg) == coherence_length(w, wg));
  wg.pump_peak_power = 0.9 * popt;
  CHECK(phase_mismatch(w, wg) < 0.0);
  wg.pump_peak_power = 1.1 * popt;
  CHECK(phase_mismatch(w, wg) > 0.0);
}

TEST_CASE("pair-rate scaling") {
  WaveguideParams wg;
  const Wavenumber w{1332.0};
  wg.pump_peak_power = optimal_pump_power(w, wg);
  const double matched = pair_rate_scaling(w, wg);
  const double g = nonlinear_coefficient(wg) * wg.pump_peak_power * wg.length;
  CHECK_THAT(matched, WithinRel(g * g, 1e-6));
  wg.pump_peak_power *= 0.5;
  CHECK(pair_rate_scaling(w, wg) < matched);
}

TEST_CASE("parameter validation") {
  WaveguideParams wg;
  wg.a_eff = -1.0;
  CHECK_THROWS_AS(wg.validate(), ConfigError);
}

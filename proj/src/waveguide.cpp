#include "sfwm/waveguide.hpp"

#include <cmath>
#include <limits>

#include "sfwm/errors.hpp"

namespace sfwm {

namespace {

constexpr double kSecondsPerSquareMetre = 1e-6;  // 1 ps/(nm km) in s/m^2

void require_positive(Wavenumber detuning) {
  if (!(detuning.value > 0.0)) throw DataError("detuning must be positive");
}

}  // namespace

double sigma_a(double f, double f_prime) {
  if (f == 0.0) throw DataError("F must be nonzero");
  return (2.0 * f_prime + 1.0 - f) / f;
}

Wavenumber delta_prime(Wavenumber delta, double f, double f_prime) {
  const double den = f + 1.0 + 2.0 * f_prime;
  if (den == 0.0) throw DataError("F + 1 + 2F' must be nonzero");
  return Wavenumber{2.0 * delta.value / den};
}

void WaveguideParams::validate() const {
  if (!(n2 > 0.0)) throw ConfigError("wg_n2", "must be positive");
  if (!(a_eff > 0.0)) throw ConfigError("wg_a_eff", "must be positive");
  if (!std::isfinite(gvd_d)) throw ConfigError("wg_gvd_D", "must be finite");
  if (!(length > 0.0)) throw ConfigError("wg_length", "must be positive");
  if (!(pump_wavelength_nm > 0.0)) throw ConfigError("wg_pump_wavelength_nm", "must be positive");
  if (!(pump_peak_power >= 0.0)) throw ConfigError("wg_pump_peak_power", "must be >= 0");
}

double beta2(const WaveguideParams& wg) {
  const double lam = wg.pump_wavelength_nm * 1e-9;
  return -wg.gvd_d * kSecondsPerSquareMetre * lam * lam / (2.0 * kPi * kSpeedOfLight);
}

double nonlinear_coefficient(const WaveguideParams& wg) {
  const double omega_p = wavelength_nm_to_angular(wg.pump_wavelength_nm).value;
  return omega_p * wg.n2 / (kSpeedOfLight * wg.a_eff);
}

double linear_mismatch(Wavenumber detuning, const WaveguideParams& wg) {
  require_positive(detuning);
  wg.validate();
  const double dw = cm_to_angular(detuning).value;
  return std::abs(beta2(wg)) * dw * dw;
}

double coherence_length(Wavenumber detuning, const WaveguideParams& wg) {
  const double dk = linear_mismatch(detuning, wg);
  return dk == 0.0 ? std::numeric_limits<double>::infinity() : 2.0 * kPi / dk;
}

double optimal_pump_power(Wavenumber detuning, const WaveguideParams& wg) {
  return linear_mismatch(detuning, wg) / (2.0 * nonlinear_coefficient(wg));
}

double phase_mismatch(Wavenumber detuning, const WaveguideParams& wg) {
  return 2.0 * nonlinear_coefficient(wg) * wg.pump_peak_power - linear_mismatch(detuning, wg);
}

double effective_coherence_length(Wavenumber detuning, const WaveguideParams& wg) {
  const double dk = phase_mismatch(detuning, wg);
  return dk == 0.0 ? std::numeric_limits<double>::infinity() : 2.0 * kPi / std::abs(dk);
}

double pair_rate_scaling(Wavenumber detuning, const WaveguideParams& wg) {
  const double g = nonlinear_coefficient(wg) * wg.pump_peak_power * wg.length;
  const double x = 0.5 * phase_mismatch(detuning, wg) * wg.length;
  const double sinc = x == 0.0 ? 1.0 : std::sin(x) / x;
  return g * g * sinc * sinc;
}

}  // namespace sfwm

#pragma once

#include "sfwm/units.hpp"

namespace sfwm {

/// Anisotropy parameter (2F' + 1 - F)/F; zero for an isotropic medium.
double sigma_a(double f, double f_prime);

/// Delta' = 2 Delta / (F + 1 + 2F').
Wavenumber delta_prime(Wavenumber delta, double f, double f_prime);

struct WaveguideParams {
  double n2 = 1.23e-19;              // m^2/W
  double a_eff = 2.0e-13;            // m^2
  double gvd_d = 500.0;              // ps/(nm km) at the pump
  double length = 0.01;              // m
  double pump_wavelength_nm = 800.0;
  double pump_peak_power = 600.0;    // W

  void validate() const;  // gvd_d may have either sign or be zero
};

/// Bulk diamond D at 781 nm, ps/(nm km), from a Sellmeier fit (normal dispersion).
inline constexpr double kBulkDiamondGvdD = -555.4;

/// beta2 = -D lambda^2 / (2 pi c), s^2/m.
double beta2(const WaveguideParams& wg);

/// gamma = omega_p n2 / (c A_eff), 1/(W m).
double nonlinear_coefficient(const WaveguideParams& wg);

/// Linear mismatch |beta2| (delta omega)^2, 1/m.
double linear_mismatch(Wavenumber detuning, const WaveguideParams& wg);

/// 2 pi / linear mismatch, m. +inf when D = 0.
double coherence_length(Wavenumber detuning, const WaveguideParams& wg);

/// Peak power that cancels the linear mismatch, W.
double optimal_pump_power(Wavenumber detuning, const WaveguideParams& wg);

/// 2 gamma P - linear mismatch at the configured pump power, 1/m.
double phase_mismatch(Wavenumber detuning, const WaveguideParams& wg);

/// 2 pi / |phase_mismatch|, m. +inf at exact phase matching.
double effective_coherence_length(Wavenumber detuning, const WaveguideParams& wg);

/// Relative pair-rate figure (gamma P L)^2 sinc^2(dk L / 2). Only ratios between
/// configurations are meaningful; no absolute rate is implied.
double pair_rate_scaling(Wavenumber detuning, const WaveguideParams& wg);

}  // namespace sfwm

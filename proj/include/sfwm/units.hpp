#pragma once

#include <compare>
#include <numbers>

namespace sfwm {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s, exact
inline constexpr double kPi = std::numbers::pi;

/// Spectral position in cm^-1. As a detuning it is measured from the pump,
/// w = w_pump - w_stokes = w_antistokes - w_pump.
struct Wavenumber {
  double value = 0.0;

  friend constexpr auto operator<=>(Wavenumber, Wavenumber) = default;
  friend constexpr Wavenumber operator+(Wavenumber a, Wavenumber b) { return {a.value + b.value}; }
  friend constexpr Wavenumber operator-(Wavenumber a, Wavenumber b) { return {a.value - b.value}; }
  friend constexpr Wavenumber operator*(double s, Wavenumber a) { return {s * a.value}; }
};

/// Angular frequency in rad/s.
struct AngularFrequency {
  double value = 0.0;

  friend constexpr auto operator<=>(AngularFrequency, AngularFrequency) = default;
  friend constexpr AngularFrequency operator+(AngularFrequency a, AngularFrequency b) {
    return {a.value + b.value};
  }
  friend constexpr AngularFrequency operator-(AngularFrequency a, AngularFrequency b) {
    return {a.value - b.value};
  }
};

constexpr AngularFrequency cm_to_angular(Wavenumber w) {
  return {2.0 * kPi * kSpeedOfLight * 100.0 * w.value};
}

constexpr Wavenumber angular_to_cm(AngularFrequency w) {
  return {w.value / (2.0 * kPi * kSpeedOfLight * 100.0)};
}

// Vacuum wavelength <-> absolute wavenumber.
constexpr Wavenumber wavelength_nm_to_cm(double lambda_nm) { return {1.0e7 / lambda_nm}; }
constexpr double cm_to_wavelength_nm(Wavenumber w) { return 1.0e7 / w.value; }

constexpr AngularFrequency wavelength_nm_to_angular(double lambda_nm) {
  return cm_to_angular(wavelength_nm_to_cm(lambda_nm));
}
constexpr double angular_to_wavelength_nm(AngularFrequency w) {
  return cm_to_wavelength_nm(angular_to_cm(w));
}

}  // namespace sfwm

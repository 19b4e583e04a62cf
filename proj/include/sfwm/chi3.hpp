#pragma once

#include <complex>

#include "sfwm/spectral.hpp"
#include "sfwm/units.hpp"

namespace sfwm {

using cplx = std::complex<double>;

/// Material constants of the third-order susceptibility. Spectral quantities
/// are in cm^-1; the Raman decay rate shares the linewidth's representation.
struct SusceptibilityParams {
  double omega_nu = 1332.0;  // optical phonon frequency
  double gamma_nu = 1.0;     // Raman linewidth
  double delta = 130.59;     // electronic/Raman interference scale
  double f = 2.0;            // chi_VVVV^E / chi_HVVH^E
  double f_prime = 1.25;     // chi_VVHH^E / chi_HVVH^E
  double chi_e = 1.0;        // chi_HVVH^E, arbitrary units

  void validate() const;
};

/// Delta / (Omega_nu - w + i Gamma_nu).
cplx resonant_term(Wavenumber w, const SusceptibilityParams& p);

/// 1 + Delta / (Omega_nu - w + i Gamma_nu).
cplx raman_factor(Wavenumber w, const SusceptibilityParams& p);

cplx chi_vvvv(Wavenumber w, const SusceptibilityParams& p);
cplx chi_hvvh(Wavenumber w, const SusceptibilityParams& p);
cplx chi_vvhh(Wavenumber w, const SusceptibilityParams& p);

// Cubic-symmetry identities.
inline cplx chi_hhhh(Wavenumber w, const SusceptibilityParams& p) { return chi_vvvv(w, p); }
inline cplx chi_vhhv(Wavenumber w, const SusceptibilityParams& p) { return chi_hvvh(w, p); }
inline cplx chi_hhvv(Wavenumber w, const SusceptibilityParams& p) { return chi_vvhh(w, p); }
inline cplx chi_hvhv(Wavenumber w, const SusceptibilityParams& p) { return chi_vvhh(w, p); }
inline cplx chi_vhvh(Wavenumber w, const SusceptibilityParams& p) { return chi_vvhh(w, p); }

struct Extrema {
  Wavenumber max;  // constructive interference of electronic and Raman terms
  Wavenumber min;  // destructive interference
};

/// Locates the maximum and minimum of |chi_HVVH| by scanning `grid` and
/// refining with golden-section search to 1e-4 cm^-1.
/// Throws FlatProfileError when Delta = 0 and GridError when an extremum
/// sits on the grid boundary.
Extrema find_extrema(const SusceptibilityParams& p, const UniformGrid& grid);

/// Scan of [Omega - 3 Delta, Omega + 3 Delta] at 0.01 cm^-1.
Extrema find_extrema(const SusceptibilityParams& p);

struct BellCrossings {
  Wavenumber plus;   // below resonance, Psi+-like state
  Wavenumber minus;  // above resonance, Psi- -like state
};

/// Detunings where |chi_VVVV| = |chi_HVVH|, found by bisection on
/// |raman_factor| - F. Requires F > 1; throws NoCrossingError otherwise or
/// when the resonance never reaches F.
BellCrossings bell_crossings(const SusceptibilityParams& p);

}  // namespace sfwm

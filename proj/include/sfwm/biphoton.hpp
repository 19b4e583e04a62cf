#pragma once

#include <array>
#include <optional>
#include <span>

#include "sfwm/chi3.hpp"
#include "sfwm/instrument.hpp"
#include "sfwm/spectral.hpp"
#include "sfwm/units.hpp"

namespace sfwm {

/// Pump polarization a_V = cos(phi), a_H = sin(phi) e^{i xi}.
struct PumpPolarization {
  double phi = 0.0;  // [0, pi/4]
  double xi = 0.0;   // [0, pi/2]

  cplx a_v() const { return {std::cos(phi), 0.0}; }
  cplx a_h() const { return std::polar(std::sin(phi), xi); }

  static PumpPolarization vertical() { return {0.0, 0.0}; }
  static PumpPolarization diagonal() { return {kPi / 4.0, 0.0}; }
  static PumpPolarization circular() { return {kPi / 4.0, kPi / 2.0}; }
};

/// Unnormalized two-photon polarization amplitudes. The first label is the
/// Stokes photon and the second the anti-Stokes photon.
struct BiphotonState {
  cplx vv, hh, hv, vh;

  double norm2() const { return std::norm(vv) + std::norm(hh) + std::norm(hv) + std::norm(vh); }
  BiphotonState scaled(cplx s) const { return {s * vv, s * hh, s * hv, s * vh}; }
  // Exchange of the Stokes and anti-Stokes slots.
  BiphotonState swapped() const { return {vv, hh, vh, hv}; }
};

/// Polarizer angles from vertical: theta1 on the Stokes arm, theta2 on the
/// anti-Stokes arm. |theta> = cos(theta)|V> + sin(theta)|H>.
struct PolarizerPair {
  double theta1 = 0.0;
  double theta2 = 0.0;
};

BiphotonState build_state(Wavenumber w, const PumpPolarization& pump, const SusceptibilityParams& p);

cplx projection_amplitude(const BiphotonState& s, PolarizerPair pol);

/// |<theta1|<theta2|psi>|^2, not normalized by the state norm.
double joint_probability(const BiphotonState& s, PolarizerPair pol);

/// Counts n(t1,t2), n(t1+pi/2,t2+pi/2), n(t1,t2+pi/2), n(t1+pi/2,t2).
struct FourCounts {
  double parallel = 0.0;
  double both_rotated = 0.0;
  double second_rotated = 0.0;
  double first_rotated = 0.0;

  double total() const { return parallel + both_rotated + second_rotated + first_rotated; }
};

/// The four settings entering one correlation parameter, in FourCounts order.
std::array<PolarizerPair, 4> correlation_settings(PolarizerPair pol);

/// n(t1,t2) / sum of the four. Throws UndefinedProbabilityError for an
/// all-zero denominator or negative counts.
double normalized_probability(const FourCounts& n);

/// E = P(t1,t2) + P(t1+,t2+) - P(t1,t2+) - P(t1+,t2).
double correlation_E(const FourCounts& n);

FourCounts projection_counts(const BiphotonState& s, PolarizerPair pol);

enum class BellVariant { PsiPlus, PsiMinus, PhiMinus };

inline constexpr double kChshTheta = kPi / 8.0;

/// (0, th), (0, -th), (2th, th), (2th, -th).
std::array<PolarizerPair, 4> chsh_angle_sets(double theta = kChshTheta);

/// Sign pattern applied to the four correlation parameters above.
std::array<double, 4> chsh_signs(BellVariant variant);

double chsh_combine(std::span<const double, 4> e, BellVariant variant);

/// CHSH parameter of a single state (no instrument).
double chsh_S(const BiphotonState& s, BellVariant variant, double theta = kChshTheta);

struct ChshSpectra {
  std::array<SpectralSeries, 4> correlations;  // in chsh_angle_sets order
  SpectralSeries s;
};

/// Correlation parameters and CHSH spectrum over `grid`. With an instrument,
/// each of the 16 unnormalized projection spectra is multiplied by the setup
/// response and convolved with the Gaussian before normalization.
ChshSpectra chsh_spectra(const UniformGrid& grid, const PumpPolarization& pump,
                         const SusceptibilityParams& p, BellVariant variant,
                         const std::optional<InstrumentResponse>& instrument = std::nullopt,
                         double theta = kChshTheta);

SpectralSeries chsh_S(const UniformGrid& grid, const PumpPolarization& pump,
                      const SusceptibilityParams& p, BellVariant variant,
                      const std::optional<InstrumentResponse>& instrument = std::nullopt,
                      double theta = kChshTheta);

/// Pure-state concurrence 2|c_vv c_hh - c_hv c_vh| / norm^2.
double concurrence(const BiphotonState& s);

}  // namespace sfwm

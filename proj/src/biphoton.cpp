#include "sfwm/biphoton.hpp"

#include <cmath>

#include "sfwm/errors.hpp"

namespace sfwm {

BiphotonState build_state(Wavenumber w, const PumpPolarization& pump, const SusceptibilityParams& p) {
  const cplx av = pump.a_v();
  const cplx ah = pump.a_h();
  const cplx r = resonant_term(w, p);
  const cplx raman = 1.0 + r;
  const cplx cross = 2.0 * av * ah * p.f_prime * (1.0 + r / (2.0 * p.f_prime));
  return {p.chi_e * (av * av * p.f + ah * ah * raman), p.chi_e * (ah * ah * p.f + av * av * raman),
          p.chi_e * cross, p.chi_e * cross};
}

cplx projection_amplitude(const BiphotonState& s, PolarizerPair pol) {
  const double c1 = std::cos(pol.theta1), s1 = std::sin(pol.theta1);
  const double c2 = std::cos(pol.theta2), s2 = std::sin(pol.theta2);
  return s.vv * (c1 * c2) + s.hh * (s1 * s2) + s.hv * (s1 * c2) + s.vh * (c1 * s2);
}

double joint_probability(const BiphotonState& s, PolarizerPair pol) {
  return std::norm(projection_amplitude(s, pol));
}

std::array<PolarizerPair, 4> correlation_settings(PolarizerPair pol) {
  const double q = kPi / 2.0;
  return {{{pol.theta1, pol.theta2},
           {pol.theta1 + q, pol.theta2 + q},
           {pol.theta1, pol.theta2 + q},
           {pol.theta1 + q, pol.theta2}}};
}

FourCounts projection_counts(const BiphotonState& s, PolarizerPair pol) {
  const auto set = correlation_settings(pol);
  return {joint_probability(s, set[0]), joint_probability(s, set[1]), joint_probability(s, set[2]),
          joint_probability(s, set[3])};
}

namespace {

double checked_total(const FourCounts& n) {
  if (n.parallel < 0.0 || n.both_rotated < 0.0 || n.second_rotated < 0.0 || n.first_rotated < 0.0)
    throw UndefinedProbabilityError("negative coincidence count");
  const double total = n.total();
  if (!(total > 0.0)) throw UndefinedProbabilityError("all four coincidence counts are zero");
  return total;
}

}  // namespace

double normalized_probability(const FourCounts& n) { return n.parallel / checked_total(n); }

double correlation_E(const FourCounts& n) {
  const double total = checked_total(n);
  return (n.parallel + n.both_rotated - n.second_rotated - n.first_rotated) / total;
}

std::array<PolarizerPair, 4> chsh_angle_sets(double theta) {
  return {{{0.0, theta}, {0.0, -theta}, {2.0 * theta, theta}, {2.0 * theta, -theta}}};
}

std::array<double, 4> chsh_signs(BellVariant variant) {
  switch (variant) {
    case BellVariant::PsiPlus:
      return {1.0, 1.0, 1.0, -1.0};
    case BellVariant::PsiMinus:
      return {1.0, 1.0, -1.0, 1.0};
    case BellVariant::PhiMinus:
      return {-1.0, -1.0, 1.0, -1.0};
  }
  return {};
}

double chsh_combine(std::span<const double, 4> e, BellVariant variant) {
  const auto sg = chsh_signs(variant);
  return sg[0] * e[0] + sg[1] * e[1] + sg[2] * e[2] + sg[3] * e[3];
}

double chsh_S(const BiphotonState& s, BellVariant variant, double theta) {
  const auto sets = chsh_angle_sets(theta);
  std::array<double, 4> e{};
  for (std::size_t k = 0; k < 4; ++k) e[k] = correlation_E(projection_counts(s, sets[k]));
  return chsh_combine(e, variant);
}

ChshSpectra chsh_spectra(const UniformGrid& grid, const PumpPolarization& pump,
                         const SusceptibilityParams& p, BellVariant variant,
                         const std::optional<InstrumentResponse>& instrument, double theta) {
  p.validate();
  const auto sets = chsh_angle_sets(theta);

  // 16 unnormalized projection spectra, [angle set][FourCounts slot].
  std::array<std::array<SpectralSeries, 4>, 4> n;
  for (auto& row : n)
    for (auto& s : row) s = SpectralSeries{grid, std::vector<double>(grid.size), {}, 0};

  for (std::size_t i = 0; i < grid.size; ++i) {
    const auto state = build_state(Wavenumber{grid.at(i)}, pump, p);
    for (std::size_t k = 0; k < 4; ++k) {
      const auto settings = correlation_settings(sets[k]);
      for (std::size_t m = 0; m < 4; ++m) n[k][m].values[i] = joint_probability(state, settings[m]);
    }
  }

  if (instrument) {
    instrument->validate();
    const auto kernel = gaussian_kernel(instrument->sigma_g, grid.step);
    for (auto& row : n)
      for (auto& s : row) s = convolve(apply_response(s, instrument->response_poly), kernel);
  }

  ChshSpectra out;
  const std::size_t guard = n[0][0].guard;
  for (auto& e : out.correlations) e = SpectralSeries{grid, std::vector<double>(grid.size), {}, guard};
  out.s = SpectralSeries{grid, std::vector<double>(grid.size), {}, guard};

  for (std::size_t i = 0; i < grid.size; ++i) {
    std::array<double, 4> e{};
    for (std::size_t k = 0; k < 4; ++k) {
      const FourCounts c{n[k][0].values[i], n[k][1].values[i], n[k][2].values[i], n[k][3].values[i]};
      // Zero-padded edges can underflow to an all-zero table.
      e[k] = c.total() > 0.0 ? correlation_E(c) : std::nan("");
      out.correlations[k].values[i] = e[k];
    }
    out.s.values[i] = chsh_combine(e, variant);
  }
  return out;
}

SpectralSeries chsh_S(const UniformGrid& grid, const PumpPolarization& pump,
                      const SusceptibilityParams& p, BellVariant variant,
                      const std::optional<InstrumentResponse>& instrument, double theta) {
  return chsh_spectra(grid, pump, p, variant, instrument, theta).s;
}

double concurrence(const BiphotonState& s) {
  const double n2 = s.norm2();
  if (!(n2 > 0.0)) throw UndefinedProbabilityError("zero state");
  return 2.0 * std::abs(s.vv * s.hh - s.hv * s.vh) / n2;
}

}  // namespace sfwm

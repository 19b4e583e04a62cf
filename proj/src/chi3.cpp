#include "sfwm/chi3.hpp"

#include <cmath>
#include <functional>
#include <string>

#include "sfwm/errors.hpp"

namespace sfwm {

void SusceptibilityParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw DataError(std::string("invalid susceptibility parameters: ") + what);
  };
  require(std::isfinite(omega_nu) && omega_nu > 0.0, "omega_nu must be > 0");
  require(std::isfinite(gamma_nu) && gamma_nu > 0.0, "gamma_nu must be > 0");
  require(std::isfinite(delta) && delta >= 0.0, "delta must be >= 0");
  require(std::isfinite(f) && f > 0.0, "F must be > 0");
  require(std::isfinite(f_prime) && f_prime > 0.0, "F_prime must be > 0");
  require(std::isfinite(chi_e) && chi_e > 0.0, "chi_e must be > 0");
}

cplx resonant_term(Wavenumber w, const SusceptibilityParams& p) {
  return p.delta / cplx(p.omega_nu - w.value, p.gamma_nu);
}

cplx raman_factor(Wavenumber w, const SusceptibilityParams& p) {
  return 1.0 + resonant_term(w, p);
}

cplx chi_vvvv(Wavenumber, const SusceptibilityParams& p) { return {p.f * p.chi_e, 0.0}; }

cplx chi_hvvh(Wavenumber w, const SusceptibilityParams& p) { return p.chi_e * raman_factor(w, p); }

cplx chi_vvhh(Wavenumber w, const SusceptibilityParams& p) {
  return p.chi_e * p.f_prime * (1.0 + resonant_term(w, p) / (2.0 * p.f_prime));
}

namespace {

constexpr double kRefineTolerance = 1e-4;

// Minimizes f on [a, b].
double golden_section(const std::function<double(double)>& f, double a, double b) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > kRefineTolerance) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// Root of f on [lo, hi] with f(lo), f(hi) of opposite sign.
double bisect(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo);
  while (hi - lo > kRefineTolerance) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

Extrema find_extrema(const SusceptibilityParams& p, const UniformGrid& grid) {
  p.validate();
  if (grid.size < 3) throw GridError("extremum search needs at least 3 grid points");
  auto mag = [&](double w) { return std::abs(raman_factor(Wavenumber{w}, p)); };

  std::size_t imax = 0, imin = 0;
  double vmax = mag(grid.at(0)), vmin = vmax;
  for (std::size_t i = 1; i < grid.size; ++i) {
    const double v = mag(grid.at(i));
    if (v > vmax) vmax = v, imax = i;
    if (v < vmin) vmin = v, imin = i;
  }
  if (vmax - vmin <= 1e-12 * vmax) throw FlatProfileError("|chi_HVVH| is flat: no Raman contribution");
  const std::size_t last = grid.size - 1;
  if (imax == 0 || imax == last || imin == 0 || imin == last)
    throw GridError("extremum on grid boundary: widen the grid around the resonance");

  const double wmax =
      golden_section([&](double w) { return -mag(w); }, grid.at(imax - 1), grid.at(imax + 1));
  const double wmin = golden_section(mag, grid.at(imin - 1), grid.at(imin + 1));
  return {Wavenumber{wmax}, Wavenumber{wmin}};
}

Extrema find_extrema(const SusceptibilityParams& p) {
  const double half = std::max(3.0 * p.delta, 10.0 * p.gamma_nu);
  return find_extrema(p, UniformGrid::covering(p.omega_nu - half, p.omega_nu + half, 0.01));
}

BellCrossings bell_crossings(const SusceptibilityParams& p) {
  p.validate();
  if (!(p.f > 1.0)) throw NoCrossingError("bell crossings require F > 1");
  auto g = [&](double w) { return std::abs(raman_factor(Wavenumber{w}, p)) - p.f; };

  if (g(p.omega_nu) <= 0.0)
    throw NoCrossingError("|raman_factor| never reaches F: Delta/Gamma too small");

  // Below resonance |R| rises monotonically from 1 to its peak.
  double reach = p.delta > 0.0 ? p.delta : 1.0;
  double lo = p.omega_nu - reach;
  while (g(lo) >= 0.0) {
    reach *= 2.0;
    if (reach > 1e9 * std::max(p.delta, 1.0)) throw NoCrossingError("no lower crossing found");
    lo = p.omega_nu - reach;
  }
  const double plus = bisect(g, lo, p.omega_nu);

  // Above resonance |R| falls to ~Gamma/Delta at Omega + Delta.
  const double hi = p.omega_nu + p.delta;
  if (g(hi) >= 0.0) throw NoCrossingError("no upper crossing found");
  const double minus = bisect(g, p.omega_nu, hi);
  return {Wavenumber{plus}, Wavenumber{minus}};
}

}  // namespace sfwm

#pragma once

#include <array>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "sfwm/biphoton.hpp"
#include "sfwm/fiberspec.hpp"
#include "sfwm/fitting.hpp"
#include "sfwm/spectral.hpp"

namespace sfwm::test {

inline FiberSpec stokes_fiber() {
  return FiberSpec(125.0, DispersionTable::read_csv(SFWM_DATA_DIR "/fiber_780hp.csv"), {780.0, 970.0});
}

inline FiberSpec antistokes_fiber() {
  return FiberSpec(25.0, DispersionTable::read_csv(SFWM_DATA_DIR "/fiber_s630hp.csv"), {630.0, 860.0});
}

inline constexpr double kPumpCm = 1.0e7 / 781.0;

// Tr(rho P) with rho = |psi><psi| in the basis VV, VH, HV, HH (Stokes first).
inline double density_matrix_probability(const BiphotonState& s, PolarizerPair pol) {
  Eigen::Vector4cd psi;
  psi << s.vv, s.vh, s.hv, s.hh;
  const Eigen::Matrix4cd rho = psi * psi.adjoint();
  const Eigen::Vector2cd a(std::cos(pol.theta1), std::sin(pol.theta1));
  const Eigen::Vector2cd b(std::cos(pol.theta2), std::sin(pol.theta2));
  Eigen::Vector4cd ab;
  ab << a(0) * b(0), a(0) * b(1), a(1) * b(0), a(1) * b(1);
  const Eigen::Matrix4cd proj = ab * ab.adjoint();
  return (rho * proj).trace().real();
}

// CHSH value from the 16 density-matrix projections.
inline double brute_force_chsh(const BiphotonState& s, std::array<double, 4> signs, double theta) {
  const std::array<PolarizerPair, 4> sets{{{0, theta}, {0, -theta}, {2 * theta, theta}, {2 * theta, -theta}}};
  const double q = kPi / 2.0;
  double out = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    const auto [t1, t2] = sets[k];
    const double pp = density_matrix_probability(s, {t1, t2});
    const double rr = density_matrix_probability(s, {t1 + q, t2 + q});
    const double pr = density_matrix_probability(s, {t1, t2 + q});
    const double rp = density_matrix_probability(s, {t1 + q, t2});
    out += signs[k] * (pp + rr - pr - rp) / (pp + rr + pr + rp);
  }
  return out;
}

// Direct double-sum convolution with the kernel centred on its middle sample.
inline std::vector<double> direct_convolution(const std::vector<double>& x, const std::vector<double>& k) {
  const auto half = static_cast<long>(k.size() / 2);
  const auto n = static_cast<long>(x.size());
  std::vector<double> y(x.size(), 0.0);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) {
      const long lag = i - j + half;
      if (lag >= 0 && lag < static_cast<long>(k.size())) y[static_cast<std::size_t>(i)] += x[static_cast<std::size_t>(j)] * k[static_cast<std::size_t>(lag)];
    }
  return y;
}

inline BiphotonState random_state(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  auto c = [&] { return cplx(n(rng), n(rng)); };
  return {c(), c(), c(), c()};
}

inline BiphotonState psi_plus() { return {1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), 0.0, 0.0}; }

struct Fig2bTruth {
  double delta = 130.59;
  double sigma_g = 24.80;
  double a = 0.82;
  double b = 1.51;
};

// Parallel-polarizer spectra whose H/V ratio follows the log model exactly.
// `scale` is the V-channel count level; a non-null rng adds Poisson noise.
inline ParallelSpectra fig2b_spectra(const Fig2bTruth& t, double scale, std::mt19937_64* rng = nullptr,
                                     double lo = 600.0, double hi = 2000.0, double step = 2.0) {
  ParallelSpectra s;
  for (double w = lo; w <= hi + 1e-9; w += step) s.omega.push_back(w);
  SusceptibilityParams p;
  const auto y = h_log_model(s.omega, p, t.delta, t.sigma_g, t.a, t.b);
  for (std::size_t i = 0; i < s.omega.size(); ++i) {
    const double resp = scale * (1.0 + 3e-4 * (s.omega[i] - 1300.0));
    double v = resp, h = resp * y[i];
    if (rng) {
      v = static_cast<double>(std::poisson_distribution<long>(v)(*rng));
      h = static_cast<double>(std::poisson_distribution<long>(h)(*rng));
    }
    s.counts_v.push_back(v);
    s.counts_h.push_back(h);
  }
  return s;
}

}  // namespace sfwm::test

#include <catch_amalgamated.hpp>

#include <random>

#include "sfwm/errors.hpp"
#include "sfwm/fitting.hpp"
#include "sfwm/montecarlo.hpp"
#include "support.hpp"

using namespace sfwm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const test::Fig2bTruth kTruth{};

FitResult fit_from_offset(const ParallelSpectra& s, HFitOptions opts = {}) {
  SusceptibilityParams p0;
  p0.delta = 115.0;
  return fit_h_spectrum(s, p0, InstrumentResponse{30.0, {1.0}}, opts);
}

}  // namespace

TEST_CASE("setup response of a flat channel is constant") {
  std::vector<double> w, v;
  for (int i = 0; i < 50; ++i) w.push_back(400.0 + 20.0 * i), v.push_back(7.0);
  const auto c = fit_setup_response(w, v, 2);
  CHECK_THAT(c[0], WithinAbs(7.0, 1e-9));
  CHECK_THAT(c[1], WithinAbs(0.0, 1e-12));
  CHECK_THAT(c[2], WithinAbs(0.0, 1e-15));
}

TEST_CASE("setup response recovers an exact line") {
  std::vector<double> w, v;
  for (int i = 0; i < 100; ++i) w.push_back(400.0 + 18.0 * i), v.push_back(3.0 + 0.001 * w.back());
  const auto c = fit_setup_response(w, v, 1);
  CHECK_THAT(c[0], WithinAbs(3.0, 1e-6));
  CHECK_THAT(c[1], WithinAbs(0.001, 1e-6));
}

TEST_CASE("setup response needs enough bins") {
  const std::vector<double> w{1.0, 2.0}, v{1.0, 2.0};
  CHECK_THROWS_AS(fit_setup_response(w, v, 2), RankDeficientError);
  const std::vector<double> same{5.0, 5.0, 5.0}, vv{1.0, 2.0, 3.0};
  CHECK_THROWS_AS(fit_setup_response(same, vv, 1), RankDeficientError);
}

TEST_CASE("setup response slope under Poisson noise") {
  std::mt19937_64 rng(2024);
  std::vector<double> w;
  for (int i = 0; i < 181; ++i) w.push_back(400.0 + 10.0 * i);
  const double slope = 2.0;  // 1e4 counts/bin at the band centre
  double sxx = 0.0, mean_w = 1300.0;
  for (double x : w) sxx += (x - mean_w) * (x - mean_w);
  const double se = std::sqrt(1e4 / sxx);  // OLS slope error with Poisson variance ~ 1e4
  int inside = 0;
  double mean_slope = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> v;
    for (double x : w) v.push_back(static_cast<double>(std::poisson_distribution<long>(1e4 + slope * (x - mean_w))(rng)));
    const auto c = fit_setup_response(w, v, 1);
    mean_slope += c[1] / 100.0;
    if (std::abs(c[1] - slope) <= 3.0 * se) ++inside;
  }
  CHECK(inside >= 95);
  CHECK(std::abs(mean_slope - slope) <= 3.0 * se / 10.0);
}

TEST_CASE("noiseless fit recovers all four parameters") {
  const auto s = test::fig2b_spectra(kTruth, 1e4);
  const auto r = fit_from_offset(s);
  CHECK(r.converged);
  CHECK_THAT(r.delta, WithinRel(kTruth.delta, 1e-4));
  CHECK_THAT(r.sigma_g, WithinRel(kTruth.sigma_g, 1e-4));
  CHECK_THAT(r.a, WithinRel(kTruth.a, 1e-4));
  CHECK_THAT(r.b, WithinRel(kTruth.b, 1e-4));
  CHECK(r.covariance.allFinite());
  for (std::size_t i = 1; i < r.history.size(); ++i) CHECK(r.history[i] <= r.history[i - 1]);

  SECTION("regenerated model reproduces the input") {
    std::vector<double> w, y;
    for (std::size_t i = 0; i < s.omega.size(); ++i)
      if (s.omega[i] >= r.window.lo && s.omega[i] <= r.window.hi) {
        w.push_back(s.omega[i]);
        y.push_back(s.counts_h[i] / eval_poly(r.response_poly, s.omega[i]));
      }
    const auto model = h_log_model(w, SusceptibilityParams{}, r.delta, r.sigma_g, r.a, r.b);
    for (std::size_t i = 0; i < w.size(); ++i) CHECK_THAT(model[i], WithinRel(y[i], 1e-6));
  }
}

TEST_CASE("count rescaling") {
  const auto s = test::fig2b_spectra(kTruth, 1e4);
  const auto base = fit_from_offset(s);

  auto all = s;
  for (auto& c : all.counts_v) c *= 3.7;
  for (auto& c : all.counts_h) c *= 3.7;
  const auto ra = fit_from_offset(all);
  CHECK_THAT(ra.delta, WithinRel(base.delta, 1e-6));
  CHECK_THAT(ra.sigma_g, WithinRel(base.sigma_g, 1e-6));
  CHECK_THAT(ra.a, WithinRel(base.a, 1e-6));

  auto h_only = s;
  for (auto& c : h_only.counts_h) c *= 3.7;
  const auto rh = fit_from_offset(h_only);
  CHECK_THAT(rh.delta, WithinRel(base.delta, 1e-6));
  CHECK_THAT(rh.sigma_g, WithinRel(base.sigma_g, 1e-6));
  CHECK_THAT(rh.a, WithinRel(3.7 * base.a, 1e-6));
  CHECK_THAT(rh.b, WithinRel(3.7 * base.b, 1e-6));
}

TEST_CASE("Poisson-noise fit keeps delta within 5 cm^-1") {
  std::mt19937_64 rng(77);
  int ok = 0;
  for (int rep = 0; rep < 10; ++rep) {
    const auto s = test::fig2b_spectra(kTruth, 3000.0, &rng);
    const auto r = fit_from_offset(s);
    if (std::abs(r.delta - kTruth.delta) <= 5.0) ++ok;
  }
  CHECK(ok >= 9);
}

TEST_CASE("inverse-variance weights") {
  std::mt19937_64 rng(78);
  const auto s = test::fig2b_spectra(kTruth, 3000.0, &rng);
  HFitOptions o;
  o.weights = FitWeights::InverseVariance;
  const auto r = fit_from_offset(s, o);
  CHECK(std::abs(r.delta - kTruth.delta) <= 5.0);
}

TEST_CASE("fitting the V channel is unidentifiable") {
  auto s = test::fig2b_spectra(kTruth, 1e4);
  s.counts_h = s.counts_v;
  CHECK_THROWS_AS(fit_from_offset(s), UnidentifiableError);
  std::mt19937_64 rng(79);
  auto noisy = test::fig2b_spectra(kTruth, 3000.0, &rng);
  noisy.counts_h = noisy.counts_v;
  CHECK_THROWS_AS(fit_from_offset(noisy), ConvergenceError);
}

TEST_CASE("iteration limit raises a diagnostic with the best point") {
  const auto s = test::fig2b_spectra(kTruth, 1e4);
  HFitOptions o;
  o.optimizer.max_iterations = 3;
  o.optimizer.restarts = 0;
  try {
    fit_from_offset(s, o);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.best_point().size() == 2);
  }
}

TEST_CASE("fit input validation") {
  auto s = test::fig2b_spectra(kTruth, 1e4);
  s.counts_h[10] = -1.0;
  CHECK_THROWS_AS(fit_from_offset(s), DataError);
  auto t = test::fig2b_spectra(kTruth, 1e4);
  t.counts_h.pop_back();
  CHECK_THROWS_AS(fit_from_offset(t), DataError);
}

TEST_CASE("reference band standard deviation") {
  std::vector<double> w, c;
  for (int i = 0; i < 300; ++i) w.push_back(600.0 + i), c.push_back(42.0);
  CHECK(reference_band_stddev(w, c) == 0.0);
  const FourSigmas zero{0, 0, 0, 0};
  CHECK(correlation_with_error({40, 40, 10, 10}, zero).std_error == 0.0);

  std::mt19937_64 rng(5);
  std::poisson_distribution<int> pois(100);
  std::vector<double> ww, cc;
  for (int i = 0; i < 260; ++i) ww.push_back(630.0 + i), cc.push_back(pois(rng));
  CHECK_THAT(reference_band_stddev(ww, cc), WithinRel(10.0, 0.2));
  CHECK_THROWS_AS(reference_band_stddev(std::vector<double>{100.0}, std::vector<double>{1.0}), DataError);
}

TEST_CASE("linear error propagation through E and S") {
  const FourCounts n{60, 50, 10, 20};
  const FourSigmas sig{3, 4, 5, 6};
  const auto e = correlation_with_error(n, sig);
  // Finite-difference oracle for the gradient.
  auto e_of = [](std::array<double, 4> c) { return correlation_E({c[0], c[1], c[2], c[3]}); };
  const std::array<double, 4> base{60, 50, 10, 20};
  double var = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    auto up = base, dn = base;
    up[k] += 1e-4;
    dn[k] -= 1e-4;
    const double g = (e_of(up) - e_of(dn)) / 2e-4;
    var += g * g * sig[k] * sig[k];
  }
  CHECK_THAT(e.std_error, WithinRel(std::sqrt(var), 1e-6));
  const auto p = probability_with_error(n, sig);
  CHECK_THAT(p.value, WithinAbs(60.0 / 140.0, 1e-15));

  const std::array<ValueWithError, 4> es{{{0.7, 0.1}, {0.7, 0.2}, {0.7, 0.2}, {-0.7, 0.4}}};
  const auto s = chsh_with_error(es, BellVariant::PsiPlus);
  CHECK_THAT(s.value, WithinAbs(2.8, 1e-12));
  CHECK_THAT(s.std_error, WithinAbs(0.5, 1e-12));
}

TEST_CASE("S error scales as 1/sqrt(N)") {
  const auto sets = chsh_angle_sets();
  std::vector<double> logn, logerr;
  for (double pairs : {2e4, 8e4, 3.2e5}) {
    SimConfig cfg(test::stokes_fiber(), test::antistokes_fiber());
    cfg.fixed_state = test::psi_plus();
    cfg.mean_pairs_per_pulse = 0.01;
    cfg.schedule = uniform_schedule(bell_schedule(sets), static_cast<std::uint64_t>(pairs / 0.01));
    cfg.seed = 11;
    const auto table = simulate(cfg);
    const auto cal = calibrate_fibers(cfg.stokes, cfg.antistokes, Wavenumber{cfg.pump_cm});
    const auto an = analyze(table, cal);
    double mean_err = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < an.s.size(); ++i)
      if (an.bins.at(i) > 600.0 && an.bins.at(i) < 1200.0) mean_err += an.s[i].std_error, ++n;
    logn.push_back(std::log(pairs));
    logerr.push_back(std::log(mean_err / n));
  }
  const double slope = (logerr.back() - logerr.front()) / (logn.back() - logn.front());
  CHECK_THAT(slope, WithinAbs(-0.5, 0.05));
}

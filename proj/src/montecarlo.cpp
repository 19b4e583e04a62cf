#include "sfwm/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include <json.hpp>

#include "sfwm/csv.hpp"
#include "sfwm/errors.hpp"

namespace sfwm {

namespace {

constexpr double kFwhmPerSigma = 2.3548200450309493;  // 2 sqrt(2 ln 2)

double wrap_pi(double a) {
  double r = std::fmod(a, kPi);
  if (r < 0.0) r += kPi;
  if (kPi - r < 1e-12) r = 0.0;
  return r;
}

std::string setting_name(PolarizerPair p) {
  return "(" + csv::format(p.theta1) + ", " + csv::format(p.theta2) + ")";
}

}  // namespace

bool same_setting(PolarizerPair a, PolarizerPair b, double tol) {
  auto close = [tol](double x, double y) {
    const double d = std::abs(wrap_pi(x) - wrap_pi(y));
    return d <= tol || kPi - d <= tol;
  };
  return close(a.theta1, b.theta1) && close(a.theta2, b.theta2);
}

std::vector<PolarizerPair> bell_schedule(std::span<const PolarizerPair> angle_sets) {
  std::vector<PolarizerPair> out;
  for (const auto& set : angle_sets)
    for (const auto& s : correlation_settings(set))
      if (std::none_of(out.begin(), out.end(), [&](PolarizerPair o) { return same_setting(o, s); }))
        out.push_back(s);
  return out;
}

std::vector<PolarizerPair> interference_scan_angle_sets() {
  const double e = kPi / 16.0;
  std::vector<PolarizerPair> sets;
  for (int k : {-2, 0, 1, 2, 3, 4, 5, 6}) sets.push_back({0.0, k * e});
  for (int k : {-6, -4, -2, 0, 2, 4, 6, 8}) sets.push_back({kPi / 4.0, k * e});
  return sets;
}

std::vector<ScheduleEntry> uniform_schedule(std::span<const PolarizerPair> settings, std::uint64_t pulses) {
  std::vector<ScheduleEntry> out;
  for (const auto& s : settings) out.push_back({s, pulses});
  return out;
}

void SimConfig::validate() const {
  susceptibility.validate();
  instrument.validate();
  if (!(mean_pairs_per_pulse >= 0.0) || !(mean_pairs_per_pulse < kMaxPairsPerPulse))
    throw ConfigError("mean_pairs_per_pulse", "must lie in [0, 0.1)");
  if (!(jitter_fwhm_ps >= 0.0)) throw ConfigError("jitter_fwhm_ps", "must be >= 0");
  if (!(background_rate >= 0.0)) throw ConfigError("background_rate", "must be >= 0");
  if (!(pump_cm > 0.0)) throw ConfigError("pump_wavelength_nm", "must be positive");
  if (!(emission_hi > emission_lo) || !(emission_lo > 0.0)) throw ConfigError("emission_range", "empty or non-positive");
  if (!(emission_step > 0.0)) throw ConfigError("emission_step", "must be positive");
  if (!(time_bin_ps > 0.0)) throw ConfigError("time_bin_ps", "must be positive");
  if (schedule.empty()) throw ConfigError("schedule", "no polarizer settings");
  for (const auto& e : schedule)
    if (e.pulses == 0) throw ConfigError("pulses_per_setting", "durations must be > 0");
}

double SimConfig::jitter_std_ps() const { return jitter_fwhm_ps / kFwhmPerSigma; }

void CoincidenceTable::validate() const {
  for (const auto& s : settings) {
    if (s.counts.size() != bins.size) throw DataError("setting histogram does not match the shared bins");
    for (double c : s.counts)
      if (!(c >= 0.0)) throw DataError("negative or non-finite histogram count");
  }
}

const SettingHistogram* CoincidenceTable::find(PolarizerPair pol) const {
  for (const auto& s : settings)
    if (same_setting(s.pol, pol, 1e-6)) return &s;
  return nullptr;
}

std::vector<double> CoincidenceTable::summed() const {
  std::vector<double> out(bins.size, 0.0);
  for (const auto& s : settings)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += s.counts[i];
  return out;
}

void CoincidenceTable::write(const std::string& csv_path) const {
  validate();
  std::ofstream out(csv_path);
  if (!out) throw DataError("cannot write " + csv_path);
  csv::write_header(out, {"setting_id", "theta1_rad", "theta2_rad", "bin_center", "counts"});
  nlohmann::ordered_json side;
  side["domain"] = domain == HistogramDomain::TimePs ? "time_ps" : "detuning_cm";
  side["bin_start"] = bins.start;
  side["bin_width"] = bins.step;
  side["bin_count"] = bins.size;
  side["jitter_exceeds_resolution"] = jitter_exceeds_resolution;
  side["settings"] = nlohmann::json::array();
  for (std::size_t k = 0; k < settings.size(); ++k) {
    const auto& s = settings[k];
    side["settings"].push_back(
        {{"id", k}, {"theta1_rad", s.pol.theta1}, {"theta2_rad", s.pol.theta2}, {"pulses", s.pulses}});
    for (std::size_t i = 0; i < bins.size; ++i)
      csv::write_row(out, {static_cast<double>(k), s.pol.theta1, s.pol.theta2, bins.at(i), s.counts[i]});
  }
  std::ofstream js(csv_path + ".settings.json");
  if (!js) throw DataError("cannot write " + csv_path + ".settings.json");
  js << side.dump(2) << '\n';
}

CoincidenceTable CoincidenceTable::read(const std::string& csv_path) {
  std::ifstream js(csv_path + ".settings.json");
  if (!js) throw DataError("missing sidecar " + csv_path + ".settings.json");
  nlohmann::json side;
  try {
    side = nlohmann::json::parse(js);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("invalid sidecar JSON: " + std::string(e.what()));
  }
  CoincidenceTable t;
  try {
    const auto dom = side.at("domain").get<std::string>();
    if (dom == "time_ps")
      t.domain = HistogramDomain::TimePs;
    else if (dom == "detuning_cm")
      t.domain = HistogramDomain::DetuningCm;
    else
      throw DataError("unknown histogram domain '" + dom + "'");
    t.bins = {side.at("bin_start").get<double>(), side.at("bin_width").get<double>(),
              side.at("bin_count").get<std::size_t>()};
    t.jitter_exceeds_resolution = side.value("jitter_exceeds_resolution", false);
    for (const auto& s : side.at("settings"))
      t.settings.push_back({{s.at("theta1_rad").get<double>(), s.at("theta2_rad").get<double>()},
                            s.value("pulses", std::uint64_t{0}),
                            std::vector<double>(t.bins.size, 0.0)});
  } catch (const nlohmann::json::exception& e) {
    throw DataError("invalid sidecar JSON: " + std::string(e.what()));
  }
  const auto tab = csv::read_file(csv_path);
  const auto id = tab.column("setting_id");
  const auto centre = tab.column("bin_center");
  const auto counts = tab.column("counts");
  for (std::size_t r = 0; r < id.size(); ++r) {
    const auto k = static_cast<std::size_t>(id[r]);
    if (id[r] < 0.0 || k >= t.settings.size()) throw DataError("setting_id not listed in the sidecar");
    const double pos = (centre[r] - t.bins.start) / t.bins.step;
    const auto i = static_cast<long long>(std::llround(pos));
    if (i < 0 || static_cast<std::size_t>(i) >= t.bins.size || std::abs(pos - static_cast<double>(i)) > 1e-6)
      throw DataError("bin_center " + csv::format(centre[r]) + " is not on the shared bin grid");
    t.settings[k].counts[static_cast<std::size_t>(i)] = counts[r];
  }
  t.validate();
  return t;
}

double TimeMap::at(double x) const {
  const double pos = (x - w.start) / w.step;
  if (!(pos >= 0.0) || pos > static_cast<double>(w.size - 1)) return std::numeric_limits<double>::quiet_NaN();
  const auto i = std::min(static_cast<std::size_t>(pos), w.size - 2);
  const double u = pos - static_cast<double>(i);
  return t_ps[i] + u * (t_ps[i + 1] - t_ps[i]);
}

double TimeMap::slope(double x) const {
  const double pos = std::clamp((x - w.start) / w.step, 0.0, static_cast<double>(w.size - 1));
  const auto i = std::min(static_cast<std::size_t>(pos), w.size - 2);
  return (t_ps[i + 1] - t_ps[i]) / w.step;
}

TimeMap tabulate_coincidence_time(const FiberSpec& stokes, const FiberSpec& antistokes, double pump_cm,
                                  double lo, double hi, double step) {
  TimeMap m{UniformGrid::covering(lo, hi, step), {}};
  if (m.w.size < 2) throw GridError("time map needs at least 2 samples");
  m.t_ps.resize(m.w.size);
  for (std::size_t i = 0; i < m.w.size; ++i)
    m.t_ps[i] = coincidence_time_ps(Wavenumber{m.w.at(i)}, stokes, antistokes, Wavenumber{pump_cm});
  return m;
}

CoincidenceTable simulate(const SimConfig& cfg) {
  cfg.validate();
  const auto grid = UniformGrid::covering(cfg.emission_lo, cfg.emission_hi, cfg.emission_step);

  std::vector<BiphotonState> states(grid.size);
  std::vector<double> density(grid.size);
  for (std::size_t i = 0; i < grid.size; ++i) {
    const double w = grid.at(i);
    const auto s = build_state(Wavenumber{w}, cfg.pump, cfg.susceptibility);
    const double resp = eval_poly(cfg.instrument.response_poly, w);
    if (resp < 0.0) throw ConfigError("response_poly", "negative inside the emission range");
    density[i] = s.norm2() * resp;
    states[i] = cfg.fixed_state ? *cfg.fixed_state : s;
  }
  const double total_density = std::accumulate(density.begin(), density.end(), 0.0);
  if (!(total_density > 0.0)) throw DataError("emission spectrum is identically zero");

  const double sigma_g = cfg.instrument.sigma_g;
  const double margin = 6.0 * sigma_g + 1.0;
  const auto tmap = tabulate_coincidence_time(cfg.stokes, cfg.antistokes, cfg.pump_cm, cfg.emission_lo - margin,
                                              cfg.emission_hi + margin);

  // Split the resolution between detector jitter (time) and a residual smear (detuning).
  const double jit = cfg.jitter_std_ps();
  bool jitter_exceeds = false;
  std::vector<double> sigma_pump(grid.size);
  for (std::size_t i = 0; i < grid.size; ++i) {
    const double slope = tmap.slope(grid.at(i));
    const double jitter_cm2 = slope == 0.0 ? 0.0 : 2.0 * jit * jit / (slope * slope);
    const double r = sigma_g * sigma_g - jitter_cm2;
    if (r < 0.0) jitter_exceeds = true;
    sigma_pump[i] = std::sqrt(std::max(0.0, r));
  }

  const auto [tmin_it, tmax_it] = std::minmax_element(tmap.t_ps.begin(), tmap.t_ps.end());
  const double tpad = 6.0 * std::sqrt(2.0) * jit + 2.0 * cfg.time_bin_ps;
  const double t0 = std::floor((*tmin_it - tpad) / cfg.time_bin_ps) * cfg.time_bin_ps;
  const auto nbins = static_cast<std::size_t>(std::ceil((*tmax_it + tpad - t0) / cfg.time_bin_ps));

  CoincidenceTable table;
  table.domain = HistogramDomain::TimePs;
  table.bins = {t0 + 0.5 * cfg.time_bin_ps, cfg.time_bin_ps, nbins};
  table.jitter_exceeds_resolution = jitter_exceeds;

  for (std::size_t k = 0; k < cfg.schedule.size(); ++k) {
    const auto& entry = cfg.schedule[k];
    SettingHistogram h{entry.pol, entry.pulses, std::vector<double>(nbins, 0.0)};

    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed & 0xffffffffu), static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(k)};
    std::mt19937_64 rng(seq);

    const double mean = cfg.mean_pairs_per_pulse * static_cast<double>(entry.pulses);
    const auto pairs = mean > 0.0 ? std::poisson_distribution<std::uint64_t>(mean)(rng) : std::uint64_t{0};
    if (pairs > 0) {
      std::vector<double> pass(grid.size);
      for (std::size_t i = 0; i < grid.size; ++i) {
        const double n2 = states[i].norm2();
        pass[i] = n2 > 0.0 ? std::clamp(joint_probability(states[i], entry.pol) / n2, 0.0, 1.0) : 0.0;
      }
      std::discrete_distribution<std::size_t> emit(density.begin(), density.end());
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      std::normal_distribution<double> normal(0.0, 1.0);
      for (std::uint64_t n = 0; n < pairs; ++n) {
        const std::size_t i = emit(rng);
        const double w = grid.at(i) + (unit(rng) - 0.5) * grid.step;
        if (unit(rng) >= pass[i]) continue;
        const double w_meas = w + sigma_pump[i] * normal(rng);
        const double t_stop = jit * normal(rng);
        const double t_start = jit * normal(rng);
        const double t = tmap.at(w_meas) + t_stop - t_start;
        if (!std::isfinite(t)) continue;
        const double pos = (t - t0) / cfg.time_bin_ps;
        if (pos < 0.0 || pos >= static_cast<double>(nbins)) continue;
        h.counts[static_cast<std::size_t>(pos)] += 1.0;
      }
    }
    if (cfg.background_rate > 0.0) {
      std::poisson_distribution<std::uint64_t> bg(cfg.background_rate * static_cast<double>(entry.pulses));
      for (auto& c : h.counts) c += static_cast<double>(bg(rng));
    }
    table.settings.push_back(std::move(h));
  }
  return table;
}

UniformGrid AnalysisBins::centres() const {
  if (!(width > 0.0) || !(hi > lo)) throw GridError("invalid analysis bins");
  const auto n = static_cast<std::size_t>(std::llround((hi - lo) / width));
  if (n == 0) throw GridError("analysis range narrower than one bin");
  return {lo + 0.5 * width, width, n};
}

CoincidenceTable rebin_to_detuning(const CoincidenceTable& table, const CalibrationFit& cal,
                                   const AnalysisBins& bins) {
  if (table.domain != HistogramDomain::TimePs) throw DataError("table is already in the detuning domain");
  table.validate();
  const auto centres = bins.centres();
  const double edge0 = centres.start - 0.5 * centres.step;

  // Detuning interval of each time bin; empty when outside the calibration.
  struct Span {
    double lo, hi;
  };
  std::vector<Span> spans(table.bins.size, Span{0.0, 0.0});
  for (std::size_t j = 0; j < table.bins.size; ++j) {
    const double t = table.bins.at(j);
    try {
      const double a = invert_time_to_wavenumber(t - 0.5 * table.bins.step, cal).value;
      const double b = invert_time_to_wavenumber(t + 0.5 * table.bins.step, cal).value;
      spans[j] = {std::min(a, b), std::max(a, b)};
    } catch (const NegativeRadicandError&) {
    }
  }

  CoincidenceTable out;
  out.domain = HistogramDomain::DetuningCm;
  out.bins = centres;
  out.jitter_exceeds_resolution = table.jitter_exceeds_resolution;
  for (const auto& s : table.settings) {
    SettingHistogram h{s.pol, s.pulses, std::vector<double>(centres.size, 0.0)};
    for (std::size_t j = 0; j < spans.size(); ++j) {
      const auto [lo, hi] = spans[j];
      if (!(hi > lo) || s.counts[j] == 0.0) continue;
      const double first = std::floor((lo - edge0) / centres.step);
      const double last = std::floor((hi - edge0) / centres.step);
      for (double b = std::max(first, 0.0); b <= std::min(last, static_cast<double>(centres.size - 1)); b += 1.0) {
        const double bl = edge0 + b * centres.step;
        const double overlap = std::min(hi, bl + centres.step) - std::max(lo, bl);
        if (overlap > 0.0) h.counts[static_cast<std::size_t>(b)] += s.counts[j] * overlap / (hi - lo);
      }
    }
    out.settings.push_back(std::move(h));
  }
  return out;
}

BellAnalysis analyze(const CoincidenceTable& table, const CalibrationFit& cal, const AnalysisOptions& opts) {
  const CoincidenceTable det =
      table.domain == HistogramDomain::TimePs ? rebin_to_detuning(table, cal, opts.bins) : table;
  det.validate();

  const auto sets = chsh_angle_sets(opts.theta);
  std::array<std::array<const SettingHistogram*, 4>, 4> hist{};
  std::vector<std::string> missing;
  for (std::size_t k = 0; k < 4; ++k) {
    const auto settings = correlation_settings(sets[k]);
    for (std::size_t m = 0; m < 4; ++m) {
      hist[k][m] = det.find(settings[m]);
      if (!hist[k][m]) {
        const auto name = setting_name(settings[m]);
        if (std::find(missing.begin(), missing.end(), name) == missing.end()) missing.push_back(name);
      }
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw MissingSettingError("table lacks polarizer settings " + list, missing);
  }

  BellAnalysis out;
  out.bins = det.bins;
  out.variant = opts.variant;
  const auto omega = det.bins.points();
  for (std::size_t k = 0; k < 4; ++k)
    for (std::size_t m = 0; m < 4; ++m)
      out.setting_stderr[4 * k + m] = reference_band_stddev(omega, hist[k][m]->counts, opts.reference_band);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < 4; ++k) {
    out.e[k].assign(det.bins.size, {nan, nan});
    bool any = false;
    const FourSigmas sig{out.setting_stderr[4 * k], out.setting_stderr[4 * k + 1], out.setting_stderr[4 * k + 2],
                         out.setting_stderr[4 * k + 3]};
    for (std::size_t i = 0; i < det.bins.size; ++i) {
      const FourCounts n{hist[k][0]->counts[i], hist[k][1]->counts[i], hist[k][2]->counts[i],
                         hist[k][3]->counts[i]};
      if (n.total() > 0.0) {
        out.e[k][i] = correlation_with_error(n, sig);
        any = true;
      }
    }
    if (!any) throw UndefinedProbabilityError("all coincidence histograms of a correlation are empty");
  }
  out.s.resize(det.bins.size);
  for (std::size_t i = 0; i < det.bins.size; ++i) {
    const std::array<ValueWithError, 4> e{out.e[0][i], out.e[1][i], out.e[2][i], out.e[3][i]};
    out.s[i] = chsh_with_error(e, opts.variant);
  }
  return out;
}

std::vector<double> forward_binned_chsh(const AnalysisBins& bins, const PumpPolarization& pump,
                                        const SusceptibilityParams& p, const InstrumentResponse& instrument,
                                        BellVariant variant, double theta) {
  instrument.validate();
  const auto centres = bins.centres();
  constexpr double kStep = 0.5;
  const double pad = std::ceil((kKernelHalfWidthSigmas + 1.0) * instrument.sigma_g / kStep) * kStep;
  // Samples at cell midpoints so each analysis bin holds whole cells.
  const UniformGrid fine{bins.lo - pad + 0.5 * kStep, kStep,
                         static_cast<std::size_t>(std::llround((bins.hi - bins.lo + 2.0 * pad) / kStep))};
  std::vector<BiphotonState> states(fine.size);
  for (std::size_t i = 0; i < fine.size; ++i) states[i] = build_state(Wavenumber{fine.at(i)}, pump, p);

  const auto sets = chsh_angle_sets(theta);
  const auto cells_per_bin = static_cast<std::size_t>(std::llround(centres.step / kStep));
  const auto first = static_cast<std::size_t>(std::llround(pad / kStep));
  std::array<std::array<std::vector<double>, 4>, 4> binned;
  for (std::size_t k = 0; k < 4; ++k) {
    const auto settings = correlation_settings(sets[k]);
    for (std::size_t m = 0; m < 4; ++m) {
      SpectralSeries s{fine, std::vector<double>(fine.size), {}, 0};
      for (std::size_t i = 0; i < fine.size; ++i) s.values[i] = joint_probability(states[i], settings[m]);
      const auto conv = smear(apply_response(s, instrument.response_poly), instrument);
      auto& out = binned[k][m];
      out.assign(centres.size, 0.0);
      for (std::size_t b = 0; b < centres.size; ++b)
        for (std::size_t c = 0; c < cells_per_bin; ++c) out[b] += conv.values[first + b * cells_per_bin + c];
    }
  }
  std::vector<double> s(centres.size);
  for (std::size_t b = 0; b < centres.size; ++b) {
    std::array<double, 4> e{};
    for (std::size_t k = 0; k < 4; ++k)
      e[k] = correlation_E({binned[k][0][b], binned[k][1][b], binned[k][2][b], binned[k][3][b]});
    s[b] = chsh_combine(e, variant);
  }
  return s;
}

}  // namespace sfwm

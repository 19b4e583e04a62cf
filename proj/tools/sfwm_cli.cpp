// sfwm: command-line front end for the photon-pair model, Bell analysis,
// spectral fitting, Monte Carlo and fibre calibration.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sfwm/biphoton.hpp"
#include "sfwm/chi3.hpp"
#include "sfwm/config.hpp"
#include "sfwm/csv.hpp"
#include "sfwm/errors.hpp"
#include "sfwm/fiberspec.hpp"
#include "sfwm/fitting.hpp"
#include "sfwm/montecarlo.hpp"
#include "sfwm/waveguide.hpp"

namespace {

using nlohmann::ordered_json;
using namespace sfwm;

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kConvergence = 3 };

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;  // key=value
  std::string out;
};

std::string data_dir() {
  if (const char* env = std::getenv("SFWM_DATA_DIR"); env && *env) return env;
  return SFWM_DATA_DIR;
}

Config load_config(const Common& c) {
  Config cfg;
  if (!c.config_path.empty()) cfg.load_file(c.config_path);
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void write_manifest(const std::string& subcommand, const Common& c, const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs, std::optional<std::uint64_t> seed) {
  ordered_json m;
  m["subcommand"] = subcommand;
  m["config"] = c.config_path.empty() ? nullptr : ordered_json(c.config_path);
  m["overrides"] = c.overrides;
  m["inputs"] = inputs;
  m["outputs"] = outputs;
  m["seed"] = seed ? ordered_json(*seed) : ordered_json(nullptr);
  m["version"] = SFWM_VERSION;
  m["timestamp"] = utc_timestamp();
  std::ofstream f(c.out + ".manifest.json");
  if (!f) throw DataError("cannot write manifest for " + c.out);
  f << m.dump(2) << '\n';
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot write " + path);
  return f;
}

void emit_json(const ordered_json& j, const std::string& path) {
  if (path.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  auto f = open_out(path);
  f << j.dump(2) << '\n';
}

ordered_json number_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

// Companion path: with_suffix("out.csv", "_ideal") is "out_ideal.csv"; a
// non-empty `ext` replaces the extension.
std::string with_suffix(const std::string& path, const std::string& suffix, const std::string& ext = "") {
  const auto dot = path.find_last_of('.');
  const auto slash = path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + suffix + ext;
  return path.substr(0, dot) + suffix + (ext.empty() ? path.substr(dot) : ext);
}

void add_common(CLI::App* sub, Common& c, bool out_required) {
  sub->add_option("--config", c.config_path, "Config file (key = value lines or JSON)")->check(CLI::ExistingFile);
  sub->add_option("--set", c.overrides, "Override a config key, key=value (repeatable)");
  auto* o = sub->add_option("--out,-o", c.out, "Output path");
  if (out_required) o->required();
}

// ---- spectrum -------------------------------------------------------------

void cmd_spectrum(const Common& c) {
  const auto cfg = load_config(c);
  const auto grid = cfg.grid();
  auto f = open_out(c.out);
  csv::write_header(f, {"omega_cm", "abs_vvvv", "abs_hvvh", "abs_vvhh", "phase_vvvv", "phase_hvvh", "phase_vvhh"});
  for (std::size_t i = 0; i < grid.size; ++i) {
    const Wavenumber w{grid.at(i)};
    const auto v = chi_vvvv(w, cfg.chi);
    const auto h = chi_hvvh(w, cfg.chi);
    const auto x = chi_vvhh(w, cfg.chi);
    csv::write_row(f, {w.value, std::abs(v), std::abs(h), std::abs(x), std::arg(v), std::arg(h), std::arg(x)});
  }
  write_manifest("spectrum", c, {}, {c.out}, std::nullopt);
}

// ---- bell -----------------------------------------------------------------

struct BellArgs {
  std::string variant;
  std::optional<double> phi, xi, sigma_g;
  std::string pump;
  bool instrument = false;
};

void write_bell_csv(const std::string& path, const ChshSpectra& sp, bool skip_guard) {
  auto f = open_out(path);
  csv::write_header(f, {"omega_cm", "E1", "E2", "E3", "E4", "S"});
  for (std::size_t i = 0; i < sp.s.size(); ++i) {
    if (skip_guard && !sp.s.valid(i)) continue;
    csv::write_row(f, {sp.s.omega(i), sp.correlations[0].values[i], sp.correlations[1].values[i],
                       sp.correlations[2].values[i], sp.correlations[3].values[i], sp.s.values[i]});
  }
}

void cmd_bell(const Common& c, const BellArgs& a) {
  auto cfg = load_config(c);
  if (!a.pump.empty()) {
    if (a.pump == "vertical")
      cfg.pump = PumpPolarization::vertical();
    else if (a.pump == "diagonal")
      cfg.pump = PumpPolarization::diagonal();
    else if (a.pump == "circular")
      cfg.pump = PumpPolarization::circular();
    else
      throw UsageError("--pump must be vertical, diagonal or circular");
  }
  if (a.phi) cfg.pump.phi = *a.phi;
  if (a.xi) cfg.pump.xi = *a.xi;
  if (a.sigma_g) cfg.instrument.sigma_g = *a.sigma_g;
  const auto variant = a.variant.empty() ? cfg.variant : parse_variant(a.variant);
  const auto grid = cfg.grid();

  std::vector<std::string> outputs{c.out};
  if (a.instrument) {
    write_bell_csv(c.out, chsh_spectra(grid, cfg.pump, cfg.chi, variant, cfg.instrument), true);
    const auto ideal = with_suffix(c.out, "_ideal");
    write_bell_csv(ideal, chsh_spectra(grid, cfg.pump, cfg.chi, variant), false);
    outputs.push_back(ideal);
  } else {
    write_bell_csv(c.out, chsh_spectra(grid, cfg.pump, cfg.chi, variant), false);
  }
  write_manifest("bell", c, {}, outputs, std::nullopt);
}

// ---- fit ------------------------------------------------------------------

struct FitArgs {
  std::string data;
  std::vector<double> window;
  std::string weights;
  std::optional<int> degree;
};

void cmd_fit(const Common& c, const FitArgs& a) {
  auto cfg = load_config(c);
  if (!a.window.empty()) {
    if (a.window.size() != 2 || !(a.window[1] > a.window[0])) throw UsageError("--window expects lo hi with lo < hi");
    cfg.fit_window = {a.window[0], a.window[1]};
  }
  if (!a.weights.empty()) cfg.set("fit_weights", a.weights);
  if (a.degree) cfg.set("fit_poly_degree", std::to_string(*a.degree));

  const auto spectra = ParallelSpectra::read_csv(a.data);
  HFitOptions opts;
  opts.window = cfg.fit_window;
  opts.response_degree = cfg.fit_poly_degree;
  opts.weights = cfg.fit_weights;
  opts.optimizer.seed = cfg.seed;
  const auto r = fit_h_spectrum(spectra, cfg.chi, cfg.instrument, opts);

  ordered_json j;
  j["delta"] = r.delta;
  j["sigma_g"] = r.sigma_g;
  j["A"] = r.a;
  j["b"] = r.b;
  j["residual"] = r.residual_norm;
  j["response_poly"] = r.response_poly;
  j["window"] = {r.window.lo, r.window.hi};
  j["weights"] = cfg.fit_weights == FitWeights::Uniform ? "uniform" : "inverse_variance";
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  ordered_json cov = ordered_json::array();
  for (int i = 0; i < 4; ++i) {
    ordered_json row = ordered_json::array();
    for (int k = 0; k < 4; ++k) row.push_back(number_or_null(r.covariance(i, k)));
    cov.push_back(row);
  }
  j["covariance"] = cov;
  j["covariance_order"] = {"delta", "sigma_g", "A", "b"};
  emit_json(j, c.out);
  if (!c.out.empty()) write_manifest("fit", c, {a.data}, {c.out}, cfg.seed);
}

// ---- simulate -------------------------------------------------------------

struct SimArgs {
  std::optional<std::uint64_t> seed;
  std::string timehist_out;
};

void cmd_simulate(const Common& c, const SimArgs& a) {
  auto cfg = load_config(c);
  if (a.seed) cfg.seed = *a.seed;
  const auto table = simulate(cfg.sim_config(data_dir()));
  table.write(c.out);
  std::vector<std::string> outputs{c.out, c.out + ".settings.json"};
  if (!a.timehist_out.empty()) {
    auto f = open_out(a.timehist_out);
    csv::write_header(f, {"time_ps", "counts"});
    const auto sum = table.summed();
    for (std::size_t i = 0; i < sum.size(); ++i) csv::write_row(f, {table.bins.at(i), sum[i]});
    outputs.push_back(a.timehist_out);
  }
  if (table.jitter_exceeds_resolution)
    std::cerr << "warning: detector jitter alone exceeds sigma_g somewhere in the band\n";
  write_manifest("simulate", c, {}, outputs, cfg.seed);
}

// ---- calibration helpers --------------------------------------------------

ordered_json calibration_json(const CalibrationFit& cal) {
  ordered_json j;
  j["a_ps"] = cal.a_ps;
  j["b_ps_per_cm2"] = cal.b;
  j["pump_cm"] = cal.pump_cm;
  j["raman_anchor_shift_ps"] = cal.raman_anchor_shift_ps;
  j["rms_residual_ps"] = cal.rms_residual_ps;
  return j;
}

CalibrationFit read_calibration(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open calibration " + path);
  try {
    const auto j = nlohmann::json::parse(f);
    CalibrationFit cal;
    cal.a_ps = j.at("a_ps").get<double>();
    cal.b = j.at("b_ps_per_cm2").get<double>();
    cal.pump_cm = j.at("pump_cm").get<double>();
    cal.raman_anchor_shift_ps = j.value("raman_anchor_shift_ps", 0.0);
    cal.rms_residual_ps = j.value("rms_residual_ps", 0.0);
    return cal;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("invalid calibration JSON " + path + ": " + e.what());
  }
}

CalibrationFit fibre_calibration(const Config& cfg) {
  return calibrate_fibers(cfg.stokes_fiber(data_dir()), cfg.antistokes_fiber(data_dir()),
                          wavelength_nm_to_cm(cfg.pump_wavelength_nm), cfg.calibration_lo, cfg.calibration_hi);
}

// ---- analyze --------------------------------------------------------------

struct AnalyzeArgs {
  std::string table;
  std::string variant;
  std::string calibration;
  bool anchor = false;
};

void cmd_analyze(const Common& c, const AnalyzeArgs& a) {
  const auto cfg = load_config(c);
  const auto table = CoincidenceTable::read(a.table);
  auto cal = a.calibration.empty() ? fibre_calibration(cfg) : read_calibration(a.calibration);
  if (a.anchor) {
    if (table.domain != HistogramDomain::TimePs) throw UsageError("--anchor needs a time-domain table");
    cal = anchor_to_raman({table.bins.points(), table.summed()}, cal);
  }
  AnalysisOptions opts;
  opts.bins = cfg.analysis_bins;
  opts.reference_band = cfg.reference_band;
  opts.variant = a.variant.empty() ? cfg.variant : parse_variant(a.variant);
  const auto r = analyze(table, cal, opts);

  auto f = open_out(c.out);
  csv::write_header(f, {"omega_cm", "E1", "E1_err", "E2", "E2_err", "E3", "E3_err", "E4", "E4_err", "S", "S_err"});
  for (std::size_t i = 0; i < r.s.size(); ++i) {
    std::vector<double> row{r.bins.at(i)};
    for (const auto& e : r.e) {
      row.push_back(e[i].value);
      row.push_back(e[i].std_error);
    }
    row.push_back(r.s[i].value);
    row.push_back(r.s[i].std_error);
    csv::write_row(f, row);
  }
  const auto summary = with_suffix(c.out, "_summary", ".json");
  ordered_json j;
  j["variant"] = variant_name(opts.variant);
  j["calibration"] = calibration_json(cal);
  j["setting_stderr"] = r.setting_stderr;
  double best = -INFINITY, best_w = NAN;
  for (std::size_t i = 0; i < r.s.size(); ++i) {
    const double z = (r.s[i].value - 2.0) / r.s[i].std_error;
    if (std::isfinite(z) && z > best) best = z, best_w = r.bins.at(i);
  }
  j["max_violation_sigma"] = number_or_null(best);
  j["max_violation_omega_cm"] = number_or_null(best_w);
  emit_json(j, summary);
  write_manifest("analyze", c, {a.table, a.table + ".settings.json"}, {c.out, summary}, std::nullopt);
}

// ---- calibrate ------------------------------------------------------------

struct CalibrateArgs {
  std::string timehist;
  std::string tc_out;
  std::optional<double> target;
};

void cmd_calibrate(const Common& c, const CalibrateArgs& a) {
  const auto cfg = load_config(c);
  const auto stokes = cfg.stokes_fiber(data_dir());
  const auto anti = cfg.antistokes_fiber(data_dir());
  const auto pump = wavelength_nm_to_cm(cfg.pump_wavelength_nm);
  auto cal = calibrate_fibers(stokes, anti, pump, cfg.calibration_lo, cfg.calibration_hi);
  std::vector<std::string> inputs;
  if (!a.timehist.empty()) {
    cal = anchor_to_raman(TimeHistogram::read_csv(a.timehist), cal, Wavenumber{a.target.value_or(kRamanAnchorCm)});
    inputs.push_back(a.timehist);
  }
  auto j = calibration_json(cal);
  j["band_cm"] = {cfg.calibration_lo, cfg.calibration_hi};
  emit_json(j, c.out);
  std::vector<std::string> outputs{c.out};
  if (!a.tc_out.empty()) {
    auto f = open_out(a.tc_out);
    csv::write_header(f, {"omega_cm", "tc_ps", "tfit_ps"});
    for (double w = cfg.calibration_lo; w <= cfg.calibration_hi + 1e-9; w += 10.0)
      csv::write_row(f, {w, coincidence_time_ps(Wavenumber{w}, stokes, anti, pump), cal.time_ps(Wavenumber{w})});
    outputs.push_back(a.tc_out);
  }
  if (!c.out.empty()) write_manifest("calibrate", c, inputs, outputs, std::nullopt);
}

// ---- waveguide ------------------------------------------------------------

struct WaveguideArgs {
  std::optional<double> n2, a_eff, gvd_d, length, wavelength, power, bulk_d;
  double detuning = 1332.0;
};

void cmd_waveguide(const Common& c, const WaveguideArgs& a) {
  auto cfg = load_config(c);
  auto& wg = cfg.waveguide;
  if (a.n2) wg.n2 = *a.n2;
  if (a.a_eff) wg.a_eff = *a.a_eff;
  if (a.gvd_d) wg.gvd_d = *a.gvd_d;
  if (a.length) wg.length = *a.length;
  if (a.wavelength) wg.pump_wavelength_nm = *a.wavelength;
  if (a.power) wg.pump_peak_power = *a.power;
  if (a.bulk_d) cfg.bulk_gvd_d = *a.bulk_d;
  wg.validate();
  const Wavenumber det{a.detuning};

  WaveguideParams bulk = wg;
  bulk.gvd_d = cfg.bulk_gvd_d;
  bulk.pump_wavelength_nm = cfg.bulk_wavelength_nm;

  ordered_json j;
  j["detuning_cm"] = a.detuning;
  j["sigma_a"] = sigma_a(cfg.chi.f, cfg.chi.f_prime);
  j["delta_prime_cm"] = delta_prime(Wavenumber{cfg.chi.delta}, cfg.chi.f, cfg.chi.f_prime).value;
  j["gamma_per_W_m"] = nonlinear_coefficient(wg);
  j["beta2_s2_per_m"] = beta2(wg);
  j["delta_k_linear_per_m"] = linear_mismatch(det, wg);
  j["coherence_length_m"] = number_or_null(coherence_length(det, wg));
  j["optimal_pump_power_W"] = optimal_pump_power(det, wg);
  j["phase_mismatch_per_m"] = phase_mismatch(det, wg);
  j["effective_coherence_length_m"] = number_or_null(effective_coherence_length(det, wg));
  j["pair_rate_scaling"] = pair_rate_scaling(det, wg);
  j["bulk_gvd_D"] = cfg.bulk_gvd_d;
  j["bulk_coherence_length_m"] = number_or_null(coherence_length(det, bulk));
  emit_json(j, c.out);
  if (!c.out.empty()) write_manifest("waveguide", c, {}, {c.out}, std::nullopt);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spontaneous four-wave mixing photon pairs: model, Bell analysis, fitting, simulation"};
  app.set_version_flag("--version", SFWM_VERSION);
  app.require_subcommand(1);

  Common common;
  BellArgs bell;
  FitArgs fit;
  SimArgs sim;
  AnalyzeArgs an;
  CalibrateArgs calib;
  WaveguideArgs wga;

  auto* spectrum = app.add_subcommand("spectrum", "Amplitude and phase of the chi3 components");
  add_common(spectrum, common, true);

  auto* bell_cmd = app.add_subcommand("bell", "CHSH spectrum S(omega) and correlation parameters");
  add_common(bell_cmd, common, true);
  bell_cmd->add_option("--variant", bell.variant, "psi+, psi- or phi-");
  bell_cmd->add_option("--pump", bell.pump, "vertical, diagonal or circular");
  bell_cmd->add_option("--phi", bell.phi, "Pump angle phi (rad)");
  bell_cmd->add_option("--xi", bell.xi, "Pump phase xi (rad)");
  bell_cmd->add_option("--sigma-g", bell.sigma_g, "Instrument Gaussian std (cm^-1)");
  bell_cmd->add_flag("--instrument", bell.instrument, "Apply response and convolution; also writes *_ideal");

  auto* fit_cmd = app.add_subcommand("fit", "Fit the H/H spectrum with the log model");
  add_common(fit_cmd, common, false);
  fit_cmd->add_option("data", fit.data, "CSV with omega_cm,counts_v,counts_h")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--window", fit.window, "Fit window lo hi (cm^-1)")->expected(2);
  fit_cmd->add_option("--weights", fit.weights, "uniform or inverse_variance");
  fit_cmd->add_option("--degree", fit.degree, "Setup response polynomial degree");

  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo coincidence histograms");
  add_common(sim_cmd, common, true);
  sim_cmd->add_option("--seed", sim.seed, "Master seed");
  sim_cmd->add_option("--timehist-out", sim.timehist_out, "Also write the summed time histogram (time_ps,counts)");

  auto* an_cmd = app.add_subcommand("analyze", "CHSH analysis of a coincidence table");
  add_common(an_cmd, common, true);
  an_cmd->add_option("table", an.table, "Coincidence table CSV")->required()->check(CLI::ExistingFile);
  an_cmd->add_option("--variant", an.variant, "psi+, psi- or phi-");
  an_cmd->add_option("--calibration", an.calibration, "CalibrationFit JSON (default: from the fibres)");
  an_cmd->add_flag("--anchor", an.anchor, "Anchor the Raman peak of the summed histogram");

  auto* cal_cmd = app.add_subcommand("calibrate", "Quadratic time calibration from the fibre tables");
  add_common(cal_cmd, common, false);
  cal_cmd->add_option("timehist", calib.timehist, "Time histogram CSV (time_ps,counts) for Raman anchoring")
      ->check(CLI::ExistingFile);
  cal_cmd->add_option("--tc-out", calib.tc_out, "Also write T_C and T_fit samples");
  cal_cmd->add_option("--target", calib.target, "Anchor detuning (cm^-1)");

  auto* wg_cmd = app.add_subcommand("waveguide", "Phase matching and coherence-length estimates");
  add_common(wg_cmd, common, false);
  wg_cmd->add_option("--detuning", wga.detuning, "Detuning (cm^-1)");
  wg_cmd->add_option("--n2", wga.n2, "Nonlinear index (m^2/W)");
  wg_cmd->add_option("--a-eff", wga.a_eff, "Effective area (m^2)");
  wg_cmd->add_option("--gvd-d", wga.gvd_d, "Waveguide D at the pump (ps/(nm km))");
  wg_cmd->add_option("--length", wga.length, "Waveguide length (m)");
  wg_cmd->add_option("--pump-wavelength", wga.wavelength, "Pump wavelength (nm)");
  wg_cmd->add_option("--pump-power", wga.power, "Pump peak power (W)");
  wg_cmd->add_option("--bulk-gvd-d", wga.bulk_d, "Bulk D for the coherence estimate (ps/(nm km))");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*spectrum) cmd_spectrum(common);
    if (*bell_cmd) cmd_bell(common, bell);
    if (*fit_cmd) cmd_fit(common, fit);
    if (*sim_cmd) cmd_simulate(common, sim);
    if (*an_cmd) cmd_analyze(common, an);
    if (*cal_cmd) cmd_calibrate(common, calib);
    if (*wg_cmd) cmd_waveguide(common, wga);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (!e.best_point().empty()) {
      std::cerr << "best point:";
      for (double x : e.best_point()) std::cerr << ' ' << csv::format(x);
      std::cerr << '\n';
    }
    return kConvergence;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return kOk;
}

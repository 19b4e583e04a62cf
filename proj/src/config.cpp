#include "sfwm/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

#include "sfwm/csv.hpp"
#include "sfwm/errors.hpp"

namespace sfwm {

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    return csv::parse_double(trim(v));
  } catch (const Error&) {
    throw ConfigError(key, "expected a number, got '" + v + "'");
  }
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  const auto t = trim(v);
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec == std::errc() && p == t.data() + t.size()) return out;
  // Accept integral values written in floating notation, e.g. 4e7.
  const double d = to_double(key, v);
  if (d < 0.0 || d != std::floor(d) || d > 1.8e19) throw ConfigError(key, "expected a non-negative integer");
  return static_cast<std::uint64_t>(d);
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::string item;
  std::stringstream ss(v);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_double(key, item));
  }
  if (out.empty()) throw ConfigError(key, "expected a comma-separated list of numbers");
  return out;
}

SpectralWindow to_window(const std::string& key, const std::string& v) {
  const auto l = to_list(key, v);
  if (l.size() != 2 || !(l[1] > l[0])) throw ConfigError(key, "expected 'lo,hi' with lo < hi");
  return {l[0], l[1]};
}

WavelengthBand to_band(const std::string& key, const std::string& v) {
  const auto w = to_window(key, v);
  return {w.lo, w.hi};
}

using Setter = std::function<void(Config&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> m;
    auto num = [&m](const char* key, auto member) {
      m[key] = [member](Config& c, const std::string& k, const std::string& v) { member(c) = to_double(k, v); };
    };
    num("omega_nu", [](Config& c) -> double& { return c.chi.omega_nu; });
    num("gamma_nu", [](Config& c) -> double& { return c.chi.gamma_nu; });
    num("delta", [](Config& c) -> double& { return c.chi.delta; });
    num("F", [](Config& c) -> double& { return c.chi.f; });
    num("F_prime", [](Config& c) -> double& { return c.chi.f_prime; });
    num("chi_e", [](Config& c) -> double& { return c.chi.chi_e; });
    num("sigma_g", [](Config& c) -> double& { return c.instrument.sigma_g; });
    num("phi", [](Config& c) -> double& { return c.pump.phi; });
    num("xi", [](Config& c) -> double& { return c.pump.xi; });
    num("grid_start", [](Config& c) -> double& { return c.grid_start; });
    num("grid_stop", [](Config& c) -> double& { return c.grid_stop; });
    num("grid_step", [](Config& c) -> double& { return c.grid_step; });
    num("pump_wavelength_nm", [](Config& c) -> double& { return c.pump_wavelength_nm; });
    num("stokes_length_m", [](Config& c) -> double& { return c.stokes.length_m; });
    num("antistokes_length_m", [](Config& c) -> double& { return c.antistokes.length_m; });
    num("calibration_lo", [](Config& c) -> double& { return c.calibration_lo; });
    num("calibration_hi", [](Config& c) -> double& { return c.calibration_hi; });
    num("mean_pairs_per_pulse", [](Config& c) -> double& { return c.mean_pairs_per_pulse; });
    num("jitter_fwhm_ps", [](Config& c) -> double& { return c.jitter_fwhm_ps; });
    num("background_rate", [](Config& c) -> double& { return c.background_rate; });
    num("time_bin_ps", [](Config& c) -> double& { return c.time_bin_ps; });
    num("analysis_lo", [](Config& c) -> double& { return c.analysis_bins.lo; });
    num("analysis_hi", [](Config& c) -> double& { return c.analysis_bins.hi; });
    num("analysis_bin_width", [](Config& c) -> double& { return c.analysis_bins.width; });
    num("wg_n2", [](Config& c) -> double& { return c.waveguide.n2; });
    num("wg_a_eff", [](Config& c) -> double& { return c.waveguide.a_eff; });
    num("wg_gvd_D", [](Config& c) -> double& { return c.waveguide.gvd_d; });
    num("wg_length", [](Config& c) -> double& { return c.waveguide.length; });
    num("wg_pump_wavelength_nm", [](Config& c) -> double& { return c.waveguide.pump_wavelength_nm; });
    num("wg_pump_peak_power", [](Config& c) -> double& { return c.waveguide.pump_peak_power; });
    num("bulk_gvd_D", [](Config& c) -> double& { return c.bulk_gvd_d; });
    num("bulk_wavelength_nm", [](Config& c) -> double& { return c.bulk_wavelength_nm; });

    m["response_poly"] = [](Config& c, const std::string& k, const std::string& v) {
      c.instrument.response_poly = to_list(k, v);
    };
    m["stokes_table"] = [](Config& c, const std::string&, const std::string& v) { c.stokes.table = trim(v); };
    m["antistokes_table"] = [](Config& c, const std::string&, const std::string& v) {
      c.antistokes.table = trim(v);
    };
    m["stokes_band_nm"] = [](Config& c, const std::string& k, const std::string& v) { c.stokes.band = to_band(k, v); };
    m["antistokes_band_nm"] = [](Config& c, const std::string& k, const std::string& v) {
      c.antistokes.band = to_band(k, v);
    };
    m["schedule"] = [](Config& c, const std::string& k, const std::string& v) {
      const auto s = trim(v);
      if (s != "chsh" && s != "scan") throw ConfigError(k, "expected 'chsh' or 'scan'");
      c.schedule = s;
    };
    m["pulses_per_setting"] = [](Config& c, const std::string& k, const std::string& v) {
      c.pulses_per_setting = to_uint(k, v);
    };
    m["seed"] = [](Config& c, const std::string& k, const std::string& v) { c.seed = to_uint(k, v); };
    m["reference_band"] = [](Config& c, const std::string& k, const std::string& v) {
      c.reference_band = to_window(k, v);
    };
    m["variant"] = [](Config& c, const std::string& k, const std::string& v) {
      try {
        c.variant = parse_variant(trim(v));
      } catch (const UsageError& e) {
        throw ConfigError(k, e.what());
      }
    };
    m["fit_window"] = [](Config& c, const std::string& k, const std::string& v) { c.fit_window = to_window(k, v); };
    m["fit_poly_degree"] = [](Config& c, const std::string& k, const std::string& v) {
      const auto d = to_uint(k, v);
      if (d > 12) throw ConfigError(k, "degree above 12 is not supported");
      c.fit_poly_degree = static_cast<int>(d);
    };
    m["fit_weights"] = [](Config& c, const std::string& k, const std::string& v) {
      const auto s = trim(v);
      if (s == "uniform")
        c.fit_weights = FitWeights::Uniform;
      else if (s == "inverse_variance")
        c.fit_weights = FitWeights::InverseVariance;
      else
        throw ConfigError(k, "expected 'uniform' or 'inverse_variance'");
    };
    return m;
  }();
  return table;
}

std::string json_to_text(const std::string& key, const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number()) return csv::format(v.get<double>());
  if (v.is_array()) {
    std::string out;
    for (const auto& x : v) {
      if (x.is_array() || x.is_object()) throw ConfigError(key, "nested values are not supported");
      out += (out.empty() ? "" : ",") + json_to_text(key, x);
    }
    return out;
  }
  throw ConfigError(key, "unsupported JSON value");
}

}  // namespace

void Config::set(const std::string& key, const std::string& value) {
  const auto& s = setters();
  const auto it = s.find(key);
  if (it == s.end()) throw ConfigError(key, "unknown configuration key");
  it->second(*this, key, value);
}

std::vector<std::string> Config::keys() {
  std::vector<std::string> out;
  for (const auto& [k, _] : setters()) out.push_back(k);
  return out;
}

void Config::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw UsageError("config " + path + " is not valid JSON: " + e.what());
    }
    for (const auto& [k, v] : j.items()) set(k, json_to_text(k, v));
    return;
  }
  std::istringstream lines(text);
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    ++n;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("config " + path + ":" + std::to_string(n) + ": expected 'key = value'");
    set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

UniformGrid Config::grid() const {
  try {
    return UniformGrid::covering(grid_start, grid_stop, grid_step);
  } catch (const GridError& e) {
    throw ConfigError("grid_step", e.what());
  }
}

namespace {

FiberSpec make_fiber(const FiberConfig& f, const std::string& data_dir, const char* bundled) {
  const std::string path = f.table.empty() ? data_dir + "/" + bundled : f.table;
  return FiberSpec(f.length_m, DispersionTable::read_csv(path), f.band);
}

}  // namespace

FiberSpec Config::stokes_fiber(const std::string& data_dir) const {
  return make_fiber(stokes, data_dir, "fiber_780hp.csv");
}

FiberSpec Config::antistokes_fiber(const std::string& data_dir) const {
  return make_fiber(antistokes, data_dir, "fiber_s630hp.csv");
}

SimConfig Config::sim_config(const std::string& data_dir) const {
  SimConfig s(stokes_fiber(data_dir), antistokes_fiber(data_dir));
  s.susceptibility = chi;
  s.pump = pump;
  s.instrument = instrument;
  s.pump_cm = wavelength_nm_to_cm(pump_wavelength_nm).value;
  const auto chsh = chsh_angle_sets();
  const auto sets = schedule == "scan" ? interference_scan_angle_sets()
                                       : std::vector<PolarizerPair>(chsh.begin(), chsh.end());
  s.schedule = uniform_schedule(bell_schedule(sets), pulses_per_setting);
  s.mean_pairs_per_pulse = mean_pairs_per_pulse;
  s.jitter_fwhm_ps = jitter_fwhm_ps;
  s.background_rate = background_rate;
  s.seed = seed;
  s.time_bin_ps = time_bin_ps;
  return s;
}

void Config::validate() const {
  auto positive = [](const char* key, double v) {
    if (!(std::isfinite(v) && v > 0.0)) throw ConfigError(key, "must be > 0");
  };
  positive("omega_nu", chi.omega_nu);
  positive("gamma_nu", chi.gamma_nu);
  positive("F", chi.f);
  positive("F_prime", chi.f_prime);
  positive("sigma_g", instrument.sigma_g);
  if (!(std::isfinite(chi.delta) && chi.delta >= 0.0)) throw ConfigError("delta", "must be >= 0");
  try {
    chi.validate();
  } catch (const DataError& e) {
    throw ConfigError("chi_e", e.what());
  }
  if (!(pump_wavelength_nm > 0.0)) throw ConfigError("pump_wavelength_nm", "must be positive");
  if (!(stokes.length_m >= 0.0)) throw ConfigError("stokes_length_m", "must be >= 0");
  if (!(antistokes.length_m >= 0.0)) throw ConfigError("antistokes_length_m", "must be >= 0");
  if (!(calibration_hi > calibration_lo)) throw ConfigError("calibration_hi", "must exceed calibration_lo");
  if (!(analysis_bins.width > 0.0) || !(analysis_bins.hi > analysis_bins.lo))
    throw ConfigError("analysis_bin_width", "analysis bins are empty");
}

BellVariant parse_variant(const std::string& name) {
  std::string n = name;
  std::transform(n.begin(), n.end(), n.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (n == "psi+" || n == "psiplus" || n == "psi_plus") return BellVariant::PsiPlus;
  if (n == "psi-" || n == "psiminus" || n == "psi_minus") return BellVariant::PsiMinus;
  if (n == "phi-" || n == "phiminus" || n == "phi_minus") return BellVariant::PhiMinus;
  throw UsageError("unknown Bell variant '" + name + "' (psi+, psi-, phi-)");
}

std::string variant_name(BellVariant v) {
  switch (v) {
    case BellVariant::PsiPlus:
      return "psi+";
    case BellVariant::PsiMinus:
      return "psi-";
    case BellVariant::PhiMinus:
      return "phi-";
  }
  return "?";
}

}  // namespace sfwm

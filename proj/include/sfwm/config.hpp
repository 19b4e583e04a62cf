#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sfwm/biphoton.hpp"
#include "sfwm/chi3.hpp"
#include "sfwm/fiberspec.hpp"
#include "sfwm/fitting.hpp"
#include "sfwm/instrument.hpp"
#include "sfwm/montecarlo.hpp"
#include "sfwm/waveguide.hpp"

namespace sfwm {

struct FiberConfig {
  std::string table;  // CSV path; empty selects the bundled example table
  double length_m = 0.0;
  WavelengthBand band;
};

/// Every tunable of the command-line tool, defaulting to the diamond source.
struct Config {
  SusceptibilityParams chi;
  InstrumentResponse instrument;
  PumpPolarization pump;

  double grid_start = 0.0;
  double grid_stop = 2500.0;
  double grid_step = 0.5;

  double pump_wavelength_nm = 781.0;
  FiberConfig stokes{"", 125.0, {780.0, 970.0}};
  FiberConfig antistokes{"", 25.0, {630.0, 860.0}};
  double calibration_lo = 400.0;
  double calibration_hi = 2200.0;

  std::string schedule = "chsh";  // chsh | scan
  double mean_pairs_per_pulse = 0.01;
  std::uint64_t pulses_per_setting = 40'000'000;
  double jitter_fwhm_ps = 30.0;
  double background_rate = 0.0;
  std::uint64_t seed = 1;
  double time_bin_ps = 1.0;

  AnalysisBins analysis_bins;
  SpectralWindow reference_band{630.0, 890.0};
  BellVariant variant = BellVariant::PsiPlus;

  SpectralWindow fit_window;
  int fit_poly_degree = 3;
  FitWeights fit_weights = FitWeights::Uniform;

  WaveguideParams waveguide;
  double bulk_gvd_d = kBulkDiamondGvdD;
  double bulk_wavelength_nm = 781.0;

  /// Sets one key from its textual value. Throws ConfigError naming the key
  /// when it is unknown or the value does not parse.
  void set(const std::string& key, const std::string& value);

  /// Flat `key = value` lines (`#` comments) or a JSON object.
  void load_file(const std::string& path);

  static std::vector<std::string> keys();

  UniformGrid grid() const;
  FiberSpec stokes_fiber(const std::string& data_dir) const;
  FiberSpec antistokes_fiber(const std::string& data_dir) const;
  SimConfig sim_config(const std::string& data_dir) const;
  void validate() const;
};

BellVariant parse_variant(const std::string& name);
std::string variant_name(BellVariant v);

}  // namespace sfwm

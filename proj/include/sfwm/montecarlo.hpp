#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sfwm/biphoton.hpp"
#include "sfwm/chi3.hpp"
#include "sfwm/fiberspec.hpp"
#include "sfwm/fitting.hpp"
#include "sfwm/instrument.hpp"

namespace sfwm {

struct ScheduleEntry {
  PolarizerPair pol;
  std::uint64_t pulses = 0;
};

/// Expands E-parameter angle sets into unique polarizer settings. Angles are
/// compared modulo pi; first occurrence wins.
std::vector<PolarizerPair> bell_schedule(std::span<const PolarizerPair> angle_sets);

/// The 16 E-points of the interference scan (44 unique settings).
std::vector<PolarizerPair> interference_scan_angle_sets();

/// Same polarizer orientations modulo pi.
bool same_setting(PolarizerPair a, PolarizerPair b, double tol = 1e-9);

std::vector<ScheduleEntry> uniform_schedule(std::span<const PolarizerPair> settings, std::uint64_t pulses);

inline constexpr double kMaxPairsPerPulse = 0.1;

struct SimConfig {
  SimConfig(FiberSpec stokes_fiber, FiberSpec antistokes_fiber)
      : stokes(std::move(stokes_fiber)), antistokes(std::move(antistokes_fiber)) {}

  SusceptibilityParams susceptibility;
  PumpPolarization pump;
  InstrumentResponse instrument;
  FiberSpec stokes;
  FiberSpec antistokes;
  double pump_cm = 1.0e7 / 781.0;  // absolute pump wavenumber
  std::vector<ScheduleEntry> schedule;
  double mean_pairs_per_pulse = 1e-3;
  double jitter_fwhm_ps = 30.0;     // per detector
  double background_rate = 0.0;     // accidentals per time bin per pulse
  std::uint64_t seed = 1;
  double emission_lo = 300.0;       // cm^-1
  double emission_hi = 2300.0;
  double emission_step = 0.05;
  double time_bin_ps = 1.0;
  std::optional<BiphotonState> fixed_state;  // replaces the chi3 state at every detuning

  void validate() const;
  double jitter_std_ps() const;
};

struct SettingHistogram {
  PolarizerPair pol;
  std::uint64_t pulses = 0;
  std::vector<double> counts;
};

enum class HistogramDomain { TimePs, DetuningCm };

/// Per-setting histograms sharing bin centres `bins` (width = bins.step).
struct CoincidenceTable {
  HistogramDomain domain = HistogramDomain::TimePs;
  UniformGrid bins;
  std::vector<SettingHistogram> settings;
  bool jitter_exceeds_resolution = false;

  void validate() const;
  const SettingHistogram* find(PolarizerPair pol) const;
  std::vector<double> summed() const;

  /// CSV `setting_id,theta1_rad,theta2_rad,bin_center,counts` plus `<path>.settings.json`.
  void write(const std::string& csv_path) const;
  static CoincidenceTable read(const std::string& csv_path);
};

/// Emission and detection of photon pairs, one RNG stream per schedule
/// entry. Deterministic for a fixed seed regardless of evaluation order.
CoincidenceTable simulate(const SimConfig& config);

/// Coincidence time per detuning used by the simulator.
struct TimeMap {
  UniformGrid w;
  std::vector<double> t_ps;
  double at(double w_cm) const;     // linear interpolation, NaN outside
  double slope(double w_cm) const;  // ps per cm^-1
};
TimeMap tabulate_coincidence_time(const FiberSpec& stokes, const FiberSpec& antistokes, double pump_cm,
                                  double lo, double hi, double step = 0.5);

struct AnalysisBins {
  double lo = 400.0;
  double hi = 2200.0;
  double width = 10.0;
  UniformGrid centres() const;
};

/// Redistributes time-domain counts over detuning bins by overlap fraction.
CoincidenceTable rebin_to_detuning(const CoincidenceTable& table, const CalibrationFit& cal,
                                   const AnalysisBins& bins = {});

struct AnalysisOptions {
  AnalysisBins bins;
  SpectralWindow reference_band{630.0, 890.0};
  BellVariant variant = BellVariant::PsiPlus;
  double theta = kChshTheta;
};

struct BellAnalysis {
  UniformGrid bins;
  BellVariant variant = BellVariant::PsiPlus;
  std::array<std::vector<ValueWithError>, 4> e;  // chsh_angle_sets order
  std::vector<ValueWithError> s;                // NaN where a bin is empty
  std::array<double, 16> setting_stderr{};      // per count, from the reference band
};

/// CHSH analysis per detuning bin. Time-domain tables are rebinned with
/// `cal` first. Throws MissingSettingError listing absent settings and
/// UndefinedProbabilityError when every bin of a correlation is empty.
BellAnalysis analyze(const CoincidenceTable& table, const CalibrationFit& cal, const AnalysisOptions& opts = {});

/// Noise-free expectation of the analysed S: the 16 instrument-convolved
/// projection spectra are integrated over each analysis bin before forming E.
std::vector<double> forward_binned_chsh(const AnalysisBins& bins, const PumpPolarization& pump,
                                        const SusceptibilityParams& p, const InstrumentResponse& instrument,
                                        BellVariant variant, double theta = kChshTheta);

}  // namespace sfwm

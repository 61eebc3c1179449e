#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace cavitydtc {

/// Uniformly sampled observables of one trajectory. Sample i is at
/// t0 + (i - t0_index) * sample_dt, and every drive period holds exactly
/// `samples_per_period` samples.
struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<double> theta;
  std::vector<double> photons;
  std::vector<std::complex<double>> alpha;
  double t0 = 0.0;
  std::size_t t0_index = 0;
  int samples_per_period = 32;
  double period = 1.0;

  [[nodiscard]] std::size_t size() const { return times.size(); }
  /// Throws std::invalid_argument if the series lengths disagree or t0_index is out of range.
  void validate() const;
};

struct Correlation {
  std::vector<double> values;  // C at every sample of the shared time grid
  bool empty_cavity = false;   // denominator at t0 vanished
  double std_error = 0.0;      // RMS over t >= t0 of the standard error of the mean
};

/// C(t) = Re<alpha*(t) alpha(t0)> / <|alpha(t0)|^2> averaged over trajectories.
[[nodiscard]] Correlation correlation(const std::vector<TrajectoryRecord>& records);

struct EnvelopePoint {
  double time;   // relative to t0
  double value;  // max |C| in the window
};

/// Stroboscopic envelope: one point per 2T window after t0, the largest |C| in
/// that window, stamped with the time where it occurs.
[[nodiscard]] std::vector<EnvelopePoint> strobe_envelope(const std::vector<double>& c,
                                                         std::size_t t0_index,
                                                         int samples_per_period, double period);

struct LifetimeFit {
  double tau = std::numeric_limits<double>::infinity();
  bool censored = true;  // no resolvable decay within the fitted window
  std::optional<double> plateau_end;
  double slope = 0.0;    // d ln C / dt after the plateau
  std::size_t n_points = 0;
};

struct LifetimeOptions {
  double floor = 0.0;            // envelope values at or below this end the fit window
  int min_plateau_cycles = 10;
  double plateau_slope_ratio = 0.1;
};

/// Least-squares fit of ln C-bar vs t, with optional prethermal plateau detection.
[[nodiscard]] LifetimeFit fit_lifetime(const std::vector<EnvelopePoint>& envelope, double period,
                                       const LifetimeOptions& opt = {});

struct SpectrumPeak {
  double frequency;  // in units of omega_d
  double power;
};

struct PowerSpectrum {
  std::vector<double> frequency;  // in units of omega_d, bins 0 .. n/2
  std::vector<double> power;      // |FFT|^2 / n^2 (one-sided bins not doubled)
  std::vector<SpectrumPeak> peaks;  // local maxima above bin 0, strongest first

  /// Power summed over the bins within +-1 of `frequency` (units of omega_d).
  [[nodiscard]] double power_near(double frequency) const;
};

[[nodiscard]] PowerSpectrum power_spectrum(const std::vector<double>& series,
                                           int samples_per_period);

enum class PhaseLabel { StableDTC, MetastableDTC, Chaotic, LowFreqDTC, NoDW };

[[nodiscard]] std::string to_string(PhaseLabel label);
[[nodiscard]] PhaseLabel label_from_string(const std::string& s);

struct ClassifyOptions {
  double strobe_offset = 0.5;      // sampling phase within each period, in units of T
  int final_cycles = 100;          // stable DTC: perfect alternation over these
  int initial_switches = 6;        // metastable: consecutive switches in [0, 6T]
  double third_harmonic_ratio = 0.05;
  double theta_threshold = 0.05;   // organization at t0
  /// Stroboscopic |C| must exceed this over the final cycles for a stable DTC.
  /// Negative selects the default: three standard errors of the ensemble mean in classify(),
  /// 3 / sqrt(n_traj) in classify_series() for ensembles, 0.05 for single series.
  double amplitude_floor = -1.0;
};

struct Classification {
  PhaseLabel label = PhaseLabel::NoDW;
  LifetimeFit lifetime;
  bool prethermal = false;
  std::vector<int> strobe_signs;          // sign of the witness at t0 + nT + offset
  std::vector<SpectrumPeak> theta_peaks;  // strongest first
  double third_harmonic_ratio = 0.0;
  bool used_correlation = true;           // false: Theta-based single-trajectory mode
  std::size_t n_traj = 0;
  double amplitude_floor = 0.0;           // noise floor used by the stable rule and the fit
};

/// Classifies one ensemble (or one trajectory) by the stroboscopic sign pattern
/// of C (Theta when the cavity was empty at t0 or when `use_theta` is set).
[[nodiscard]] Classification classify(const std::vector<TrajectoryRecord>& records,
                                      const ClassifyOptions& opt = {}, bool use_theta = false);

/// Theta power spectrum over the drive window, averaged incoherently over trajectories.
[[nodiscard]] PowerSpectrum drive_theta_spectrum(const std::vector<TrajectoryRecord>& records);

/// Lower-level entry: classify a witness series directly. The low-frequency
/// DTC test is skipped when no Theta spectrum is given.
[[nodiscard]] Classification classify_series(const std::vector<double>& witness,
                                             const std::optional<PowerSpectrum>& theta_spectrum,
                                             std::size_t t0_index, int samples_per_period,
                                             double period, double theta_at_t0,
                                             std::size_t n_traj, const ClassifyOptions& opt);

}  // namespace cavitydtc

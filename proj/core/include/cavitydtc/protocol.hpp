#pragma once

#include <vector>

#include "cavitydtc/field.hpp"
#include "cavitydtc/params.hpp"

namespace cavitydtc {

/// Pump program: linear ramp to epsilon0, hold, then sinusoidal modulation.
/// All times and frequencies in code units; epsilon0 is an energy in code units.
struct PumpSchedule {
  double ramp_duration = 0.0;
  double hold_end = 0.0;
  double epsilon0 = 0.0;
  double f_d = 0.0;
  double omega_d = 1.0;
  int drive_cycles = 200;

  [[nodiscard]] double period() const { return 2.0 * kPi / omega_d; }
  [[nodiscard]] double end_time() const { return hold_end + drive_cycles * period(); }
  void validate() const;
};

/// Schedule with lab-unit timings (ramp 2.5 ms, hold until 30 ms by default).
[[nodiscard]] PumpSchedule make_schedule(const SystemParams& p, double epsilon0, double f_d,
                                         double omega_d_khz, int drive_cycles = 200,
                                         double ramp_ms = 2.5, double hold_end_ms = 30.0);

[[nodiscard]] double epsilon_at(const PumpSchedule& s, double t);

/// Self-organization threshold of the homogeneous two-mode model,
/// omega_rec (delta_eff^2 + kappa^2) / (2 |delta_eff| N |U0|). Used as the
/// starting bracket for the simulated threshold search.
[[nodiscard]] double homogeneous_threshold_estimate(const SystemParams& p);

struct CriticalPumpOptions {
  double dt = 2e-3;
  double theta_threshold = 0.05;
  double seed_amplitude = 1e-4;
  double rel_tol = 0.01;
  double ramp_ms = 2.5;
  double hold_end_ms = 30.0;
  double readout_window_ms = 5.0;
  int max_bracket_expansions = 12;
};

struct CriticalPumpSample {
  double epsilon;
  double mean_abs_theta;
  double photons;
  bool organized;
};

struct CriticalPumpResult {
  double epsilon_crit;
  std::vector<CriticalPumpSample> trace;
};

/// Mean-field probe: ramp to `epsilon`, hold, and report the read-out window.
[[nodiscard]] CriticalPumpSample probe_organization(const SystemParams& p, const Grid& grid,
                                                    const CField& initial, double epsilon,
                                                    const CriticalPumpOptions& opt = {});

/// Bisects on epsilon for the onset of self-organization starting from `initial`
/// (ground state, alpha = 0).
[[nodiscard]] CriticalPumpResult find_critical_pump(const SystemParams& p, const Grid& grid,
                                                    const CField& initial,
                                                    const CriticalPumpOptions& opt = {});

/// Convenience overload that prepares the ground state first.
[[nodiscard]] CriticalPumpResult find_critical_pump(const SystemParams& p, const Grid& grid,
                                                    const CriticalPumpOptions& opt = {});

}  // namespace cavitydtc

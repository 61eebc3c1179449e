#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "cavitydtc/params.hpp"
#include "cavitydtc/protocol.hpp"
#include "cavitydtc/sweep.hpp"

namespace cavitydtc {

/// Everything a CLI invocation can set from a config file. Frequencies are
/// ordinary frequencies (omega = 2 pi f) in the units named by the key.
///
/// The file is TOML with sections [system], [grid], [drive], [run], [sweep] and
/// [crit_pump]. Every key is optional; unknown sections or keys are errors.
struct SimulationConfig {
  // [system]
  double n_atoms = 65e3;
  double recoil_freq_khz = 3.55;
  double kappa_khz = 4.55;
  double u0_hz = -0.36;
  double delta_eff_khz = -18.5;
  double e_int_over_e_rec = 0.0;
  double e_osc_over_e_rec = 0.0;  // overridden by osc_length_lambda when set

  // [grid]
  int n_cells = 32;
  int points_per_cell = 16;

  // [drive]
  double pump_factor = 1.02;
  double f_d = 0.5;
  double omega_d_khz = 4.0;
  int drive_cycles = 100;
  double ramp_ms = 2.5;
  double hold_end_ms = 30.0;

  // [run]
  RunSettings settings;
  std::size_t n_traj = 64;
  std::uint64_t seed = 1;
  int threads = 1;

  // [sweep]
  std::vector<double> fd_grid = desk_scale_sweep().fd_grid;
  std::vector<double> wd_grid_khz = desk_scale_sweep().wd_grid_khz;

  // [crit_pump]
  CriticalPumpOptions crit;

  /// Physical parameters in code units with trap and interaction applied.
  [[nodiscard]] SystemParams system() const;
  [[nodiscard]] SweepSpec sweep_spec() const;
  [[nodiscard]] PumpSchedule schedule(double epsilon_crit) const;
  void validate() const;
};

/// Throws ConfigError with the offending line on malformed input or unknown keys.
[[nodiscard]] SimulationConfig parse_config(std::string_view text);
[[nodiscard]] SimulationConfig load_config(const std::filesystem::path& path);

}  // namespace cavitydtc

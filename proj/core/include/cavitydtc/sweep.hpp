#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cavitydtc/analysis.hpp"
#include "cavitydtc/field.hpp"
#include "cavitydtc/params.hpp"
#include "cavitydtc/protocol.hpp"

namespace cavitydtc {

/// Integration and sampling settings shared by every trajectory of a run.
struct RunSettings {
  int samples_per_period = 32;
  int steps_per_period = 512;  // dt = T / steps_per_period; a multiple of samples_per_period
  int splitting_order = 2;
  bool noise_on = true;
  bool wigner_sampling_on = true;
  double seed_amplitude = 1e-4;  // mean-field symmetry breaking when Wigner sampling is off
  bool record_pre_drive = true;

  void validate() const;
};

/// Ramp, hold and drive for one trajectory from `initial` (ground state, alpha = 0).
/// Samples lie on a uniform grid through t0 = hold_end. The state at the end of
/// the drive is copied to `final_state` when given.
[[nodiscard]] TrajectoryRecord run_trajectory(const SystemParams& p, const PumpSchedule& schedule,
                                              const Grid& grid, const CField& initial,
                                              const RunSettings& settings, std::uint64_t seed,
                                              CField* final_state = nullptr);

struct EnsembleRecord {
  std::vector<TrajectoryRecord> records;  // successful trajectories, index order
  std::size_t n_traj = 0;
  std::size_t n_failed = 0;
  std::uint64_t master_seed = 0;
  Correlation c_of_t;
  std::vector<EnvelopePoint> c_strobe;
  bool valid = true;
  std::string failure;
};

struct EnsembleSpec {
  SystemParams params;
  PumpSchedule schedule;
  Grid grid;
  CField initial;
  RunSettings settings;
  std::size_t n_traj = 64;
  std::uint64_t master_seed = 1;
  std::uint64_t cell_index = 0;
  int threads = 1;
  double max_failure_fraction = 0.01;
};

[[nodiscard]] EnsembleRecord run_ensemble(const EnsembleSpec& spec);

struct SweepSpec {
  std::vector<double> fd_grid;
  std::vector<double> wd_grid_khz;
  double e_int_over_e_rec = 0.0;
  double e_osc_over_e_rec = 0.0;
  std::size_t n_traj = 64;
  std::uint64_t master_seed = 1;
  int drive_cycles = 100;
  double pump_factor = 1.02;  // epsilon0 / epsilon_crit
  int n_cells = 32;
  int points_per_cell = 16;
  SystemParams base = default_experiment_params();
  RunSettings settings;
  CriticalPumpOptions crit;

  void validate() const;
  /// Stable textual digest of everything that affects the diagram.
  [[nodiscard]] std::string fingerprint() const;
};

/// Desk-scale (CI) and paper-scale presets for the drive grid and ensemble size.
[[nodiscard]] SweepSpec desk_scale_sweep();
[[nodiscard]] SweepSpec paper_scale_sweep();

struct PhasePoint {
  double f_d = 0.0;
  double omega_d_khz = 0.0;
  bool valid = false;
  PhaseLabel label = PhaseLabel::NoDW;
  double tau_ms = 0.0;       // +inf when censored
  bool plateau = false;
  double plateau_end_ms = 0.0;
  double epsilon_crit = 0.0;
  std::size_t n_failed = 0;
  std::string error;
};

struct PhaseDiagram {
  std::vector<double> fd_grid;
  std::vector<double> wd_grid_khz;
  std::vector<PhasePoint> cells;  // row-major: fd index outer, wd index inner
  double epsilon_crit = 0.0;
  std::string fingerprint;
  double wall_seconds = 0.0;
  std::size_t cells_computed = 0;  // this invocation
  bool complete = false;

  [[nodiscard]] const PhasePoint& at(std::size_t i_fd, std::size_t i_wd) const {
    return cells[i_fd * wd_grid_khz.size() + i_wd];
  }
};

struct SweepOptions {
  std::optional<std::filesystem::path> out_dir;  // cell store + diagram.csv + manifest.json
  bool resume = false;
  int threads = 1;
  /// Stop after this many newly computed cells (simulated interruption); 0 = no limit.
  std::size_t stop_after_cells = 0;
  std::function<void(const PhasePoint&)> on_cell;
};

/// epsilon_crit -> ground state -> ensemble -> classify for every (f_d, omega_d) cell.
[[nodiscard]] PhaseDiagram build_phase_diagram(const SweepSpec& spec, const SweepOptions& opt = {});

/// Columns f_d,omega_d_kHz,label,tau_ms,plateau.
[[nodiscard]] std::string diagram_csv(const PhaseDiagram& d);
void write_manifest(const std::filesystem::path& path, const SweepSpec& spec, const PhaseDiagram& d);

// Run outputs shared by the CLI.

/// Sample-wise ensemble mean of Theta, |alpha|^2 and alpha on the shared time grid.
[[nodiscard]] TrajectoryRecord ensemble_mean(const std::vector<TrajectoryRecord>& records);

/// Columns t_ms,epsilon,theta,photons,C with epsilon in units of `epsilon_unit`.
void write_timeseries_csv(const std::filesystem::path& path, const SystemParams& p,
                          const PumpSchedule& schedule, double epsilon_unit,
                          const TrajectoryRecord& rec, const std::vector<double>& c);
/// Columns cycle,C_bar.
void write_envelope_csv(const std::filesystem::path& path, const std::vector<EnvelopePoint>& env,
                        double period);
/// {label, tau, plateau_end, peaks} with times in ms.
[[nodiscard]] std::string classification_json(const SystemParams& p, const Classification& c);

}  // namespace cavitydtc

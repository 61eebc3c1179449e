#pragma once

#include <numbers>

namespace cavitydtc {

// Code units: hbar = m = lambda = 1. Frequencies are angular, energies are
// frequencies, and the recoil frequency is hbar k^2 / 2m = 2 pi^2.
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kWaveNumber = 2.0 * kPi;
inline constexpr double kRecoilFreq = 2.0 * kPi * kPi;
inline constexpr double kHbarSi = 1.054571817e-34;

/// Physical parameters of the pumped atom-cavity system, stored in code units.
///
/// `recoil_freq_si` anchors the conversion between code time and SI time; all
/// other frequency-like fields are already expressed in code units. Use the
/// `*_to_code` helpers when reading SI-labelled input.
struct SystemParams {
  double n_atoms = 65e3;
  double mass_si = 1.44316060e-25;   // kg, 87Rb; informational
  double wavelength_si = 803e-9;     // m; informational
  double recoil_freq_si = 0.0;       // rad/s
  double kappa = 0.0;
  double u0 = 0.0;
  double delta_eff = 0.0;
  double trap_freq = 0.0;
  double g_contact = 0.0;

  /// Bare pump-cavity detuning; stored implicitly through delta_eff.
  [[nodiscard]] double delta_c() const { return delta_eff + n_atoms * u0 / 2.0; }

  /// Seconds per code time unit.
  [[nodiscard]] double time_unit_s() const { return kRecoilFreq / recoil_freq_si; }
  [[nodiscard]] double ms_to_code(double ms) const { return ms * 1e-3 / time_unit_s(); }
  [[nodiscard]] double code_to_ms(double t) const { return t * time_unit_s() * 1e3; }
  /// Converts an ordinary frequency f (so that omega = 2 pi f) to a code angular frequency.
  [[nodiscard]] double hz_to_code(double hz) const { return 2.0 * kPi * hz * time_unit_s(); }
  [[nodiscard]] double code_to_hz(double w) const { return w / (2.0 * kPi * time_unit_s()); }
  [[nodiscard]] double khz_to_code(double khz) const { return hz_to_code(khz * 1e3); }
  [[nodiscard]] double code_to_khz(double w) const { return code_to_hz(w) * 1e-3; }

  /// Throws ConfigError on violated invariants (u0 < 0, trap >= 0, g >= 0, N > 0).
  void validate() const;
};

/// Angular frequencies in rad/s plus mass and wavelength in SI. The recoil
/// frequency is derived from mass and wavelength.
struct SiParams {
  double n_atoms;
  double mass;
  double wavelength;
  double kappa;
  double u0;
  double delta_eff;
  double trap_freq;
  double g_contact;  // J m
};

/// Frequencies given as multiples of the recoil frequency.
struct RecoilUnitParams {
  double n_atoms;
  double recoil_freq_si;
  double kappa;
  double u0;
  double delta_eff;
  double trap_freq;
  double e_int_over_e_rec;
};

[[nodiscard]] SystemParams from_si(const SiParams& si);
[[nodiscard]] SystemParams from_recoil_units(const RecoilUnitParams& r);

/// Experimental parameter set with no trap and no contact interaction.
[[nodiscard]] SystemParams default_experiment_params();

struct DerivedScales {
  double e_rec;
  double e_osc;
  double e_int;
  double osc_length;  // +inf when the trap is off
  double b;
};

[[nodiscard]] DerivedScales derive_scales(const SystemParams& p);

/// Sets g_contact so that g N / lambda equals `e_int_over_e_rec` recoil energies.
[[nodiscard]] SystemParams set_interaction_energy(SystemParams p, double e_int_over_e_rec);
/// Sets the trap from an oscillator length in units of lambda (0 or inf disables it).
[[nodiscard]] SystemParams set_osc_length(SystemParams p, double lz_over_lambda);
/// Sets the trap from E_osc / E_rec.
[[nodiscard]] SystemParams set_osc_energy(SystemParams p, double e_osc_over_e_rec);

}  // namespace cavitydtc

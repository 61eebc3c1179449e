#include "cavitydtc/params.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "cavitydtc/errors.hpp"

namespace cavitydtc {

void SystemParams::validate() const {
  auto check = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("invalid parameters: " + what);
  };
  check(std::isfinite(n_atoms) && n_atoms > 0, "n_atoms must be > 0");
  check(std::isfinite(recoil_freq_si) && recoil_freq_si > 0, "recoil frequency must be > 0");
  check(std::isfinite(kappa) && kappa >= 0, "kappa must be >= 0");
  check(std::isfinite(u0) && u0 < 0, "u0 must be negative (red-detuned pump)");
  check(std::isfinite(delta_eff), "delta_eff must be finite");
  check(std::isfinite(trap_freq) && trap_freq >= 0, "trap frequency must be >= 0");
  check(std::isfinite(g_contact) && g_contact >= 0, "contact coupling must be >= 0");
}

SystemParams from_si(const SiParams& si) {
  SystemParams p;
  p.n_atoms = si.n_atoms;
  p.mass_si = si.mass;
  p.wavelength_si = si.wavelength;
  p.recoil_freq_si = kRecoilFreq * kHbarSi / (si.mass * si.wavelength * si.wavelength);
  const double t_unit = p.time_unit_s();
  p.kappa = si.kappa * t_unit;
  p.u0 = si.u0 * t_unit;
  p.delta_eff = si.delta_eff * t_unit;
  p.trap_freq = si.trap_freq * t_unit;
  // code unit of g is (hbar / t_unit) * lambda
  const double g_unit = kHbarSi / t_unit * si.wavelength;
  p.g_contact = si.g_contact / g_unit;
  p.validate();
  return p;
}

SystemParams from_recoil_units(const RecoilUnitParams& r) {
  SystemParams p;
  p.n_atoms = r.n_atoms;
  p.recoil_freq_si = r.recoil_freq_si;
  p.kappa = r.kappa * kRecoilFreq;
  p.u0 = r.u0 * kRecoilFreq;
  p.delta_eff = r.delta_eff * kRecoilFreq;
  p.trap_freq = r.trap_freq * kRecoilFreq;
  p = set_interaction_energy(p, r.e_int_over_e_rec);
  p.validate();
  return p;
}

SystemParams default_experiment_params() {
  SystemParams p;
  p.n_atoms = 65e3;
  p.recoil_freq_si = 2.0 * kPi * 3.55e3;
  p.kappa = p.khz_to_code(4.55);
  p.u0 = -p.hz_to_code(0.36);
  p.delta_eff = -p.khz_to_code(18.5);
  p.trap_freq = 0.0;
  p.g_contact = 0.0;
  return p;
}

DerivedScales derive_scales(const SystemParams& p) {
  DerivedScales s{};
  s.e_rec = kRecoilFreq;
  s.e_osc = p.trap_freq;
  s.e_int = p.g_contact * p.n_atoms;
  s.osc_length = p.trap_freq > 0 ? 1.0 / std::sqrt(p.trap_freq)
                                 : std::numeric_limits<double>::infinity();
  s.b = p.trap_freq / kRecoilFreq;
  return s;
}

SystemParams set_interaction_energy(SystemParams p, double e_int_over_e_rec) {
  if (!(e_int_over_e_rec >= 0) || !std::isfinite(e_int_over_e_rec)) {
    throw ConfigError("E_int/E_rec must be finite and >= 0 (attractive interactions unsupported)");
  }
  p.g_contact = e_int_over_e_rec * kRecoilFreq / p.n_atoms;
  return p;
}

SystemParams set_osc_length(SystemParams p, double lz_over_lambda) {
  if (std::isinf(lz_over_lambda) || lz_over_lambda == 0.0) {
    p.trap_freq = 0.0;
    return p;
  }
  if (!(lz_over_lambda > 0)) throw ConfigError("oscillator length must be > 0");
  p.trap_freq = 1.0 / (lz_over_lambda * lz_over_lambda);
  return p;
}

SystemParams set_osc_energy(SystemParams p, double e_osc_over_e_rec) {
  if (!(e_osc_over_e_rec >= 0) || !std::isfinite(e_osc_over_e_rec)) {
    throw ConfigError("E_osc/E_rec must be finite and >= 0");
  }
  p.trap_freq = e_osc_over_e_rec * kRecoilFreq;
  return p;
}

}  // namespace cavitydtc

#include "cavitydtc/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cavitydtc/dynamics.hpp"
#include "cavitydtc/errors.hpp"
#include "cavitydtc/ground_state.hpp"

namespace cavitydtc {

void PumpSchedule::validate() const {
  if (!(ramp_duration > 0)) throw ConfigError("pump ramp duration must be > 0");
  if (!(hold_end >= ramp_duration)) throw ConfigError("pump hold must end after the ramp");
  if (!(epsilon0 >= 0)) throw ConfigError("pump plateau must be >= 0");
  if (!(f_d >= 0 && f_d <= 1)) throw ConfigError("drive strength f_d must lie in [0, 1]");
  if (!(omega_d > 0)) throw ConfigError("drive frequency must be > 0");
  if (drive_cycles < 0) throw ConfigError("drive cycles must be >= 0");
}

PumpSchedule make_schedule(const SystemParams& p, double epsilon0, double f_d, double omega_d_khz,
                           int drive_cycles, double ramp_ms, double hold_end_ms) {
  PumpSchedule s;
  s.ramp_duration = p.ms_to_code(ramp_ms);
  s.hold_end = p.ms_to_code(hold_end_ms);
  s.epsilon0 = epsilon0;
  s.f_d = f_d;
  s.omega_d = p.khz_to_code(omega_d_khz);
  s.drive_cycles = drive_cycles;
  s.validate();
  return s;
}

double epsilon_at(const PumpSchedule& s, double t) {
  if (t <= 0) return 0.0;
  if (t < s.ramp_duration) return s.epsilon0 * t / s.ramp_duration;
  if (t <= s.hold_end) return s.epsilon0;
  return s.epsilon0 * (1.0 + s.f_d * std::sin(s.omega_d * (t - s.hold_end)));
}

double homogeneous_threshold_estimate(const SystemParams& p) {
  const double d = p.delta_eff;
  return kRecoilFreq * (d * d + p.kappa * p.kappa) / (2.0 * std::abs(d) * p.n_atoms * std::abs(p.u0));
}

CriticalPumpSample probe_organization(const SystemParams& p, const Grid& grid,
                                      const CField& initial, double epsilon,
                                      const CriticalPumpOptions& opt) {
  EomContext ctx;
  ctx.params = p;
  ctx.grid = grid;
  ctx.pump.ramp_duration = p.ms_to_code(opt.ramp_ms);
  ctx.pump.hold_end = p.ms_to_code(opt.hold_end_ms);
  ctx.pump.epsilon0 = epsilon;
  ctx.pump.drive_cycles = 0;
  ctx.noise_on = false;
  ctx.wigner_sampling_on = false;
  ctx.dt = opt.dt;
  const long n_total = std::lround(ctx.pump.hold_end / ctx.dt);
  ctx.dt = ctx.pump.hold_end / static_cast<double>(n_total);
  Integrator integ(ctx);

  CField s = seed_density_wave(initial, grid, opt.seed_amplitude);
  s.alpha = 0.0;
  s.time = 0.0;
  const long n_window = std::max(1L, std::lround(p.ms_to_code(opt.readout_window_ms) / ctx.dt));
  integ.advance(s, n_total - n_window, nullptr);
  double theta_acc = 0.0, photon_acc = 0.0;
  for (long i = 0; i < n_window; ++i) {
    integ.step(s, nullptr);
    theta_acc += std::abs(order_parameter(s, grid));
    photon_acc += std::norm(s.alpha);
  }
  CriticalPumpSample out{};
  out.epsilon = epsilon;
  out.mean_abs_theta = theta_acc / static_cast<double>(n_window);
  out.photons = photon_acc / static_cast<double>(n_window);
  out.organized = out.mean_abs_theta > opt.theta_threshold;
  return out;
}

CriticalPumpResult find_critical_pump(const SystemParams& p, const Grid& grid,
                                      const CField& initial, const CriticalPumpOptions& opt) {
  CriticalPumpResult res{};
  auto probe = [&](double eps) {
    res.trace.push_back(probe_organization(p, grid, initial, eps, opt));
    return res.trace.back().organized;
  };
  const double guess = homogeneous_threshold_estimate(p);
  auto bracket_failure = [&](double a, double b) {
    std::ostringstream os;
    os << "find_critical_pump: could not bracket the threshold, scanned [" << a << ", " << b
       << "] (code units)";
    return NumericalError(os.str());
  };
  double lo = 0.5 * guess;
  int expansions = 0;
  while (probe(lo)) {
    if (++expansions > opt.max_bracket_expansions) throw bracket_failure(lo, 2.0 * guess);
    lo *= 0.5;
  }
  double hi = std::max(2.0 * guess, 2.0 * lo);
  expansions = 0;
  while (!probe(hi)) {
    if (++expansions > opt.max_bracket_expansions) throw bracket_failure(lo, hi);
    lo = hi;
    hi *= 2.0;
  }
  while ((hi - lo) > opt.rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (probe(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  res.epsilon_crit = 0.5 * (lo + hi);
  return res;
}

CriticalPumpResult find_critical_pump(const SystemParams& p, const Grid& grid,
                                      const CriticalPumpOptions& opt) {
  const auto gs = ground_state(p, grid);
  return find_critical_pump(p, grid, gs.state, opt);
}

}  // namespace cavitydtc

#include "cavitydtc/ground_state.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cavitydtc/dynamics.hpp"
#include "cavitydtc/errors.hpp"
#include "cavitydtc/spectral.hpp"

namespace cavitydtc {

std::vector<double> thomas_fermi_density(const SystemParams& p, const Grid& grid) {
  const double gn = p.g_contact * p.n_atoms;
  const double w = p.trap_freq;
  if (!(gn > 0) || !(w > 0)) throw ConfigError("Thomas-Fermi profile needs a trap and g > 0");
  // (4/3) mu R = g N with R = sqrt(2 mu) / w
  const double mu = std::pow(3.0 * gn * w / (4.0 * std::sqrt(2.0)), 2.0 / 3.0);
  std::vector<double> rho(grid.n_points);
  for (std::size_t j = 0; j < grid.n_points; ++j) {
    const double z = grid.positions[j];
    rho[j] = std::max(0.0, (mu - 0.5 * w * w * z * z) / gn);
  }
  return rho;
}

std::vector<double> gaussian_density(const SystemParams& p, const Grid& grid) {
  if (!(p.trap_freq > 0)) throw ConfigError("Gaussian profile needs a trap");
  const double lz = 1.0 / std::sqrt(p.trap_freq);
  std::vector<double> rho(grid.n_points);
  for (std::size_t j = 0; j < grid.n_points; ++j) {
    const double z = grid.positions[j];
    rho[j] = std::exp(-z * z / (lz * lz)) / (std::sqrt(kPi) * lz);
  }
  return rho;
}

InitialGuess choose_initial_guess(const SystemParams& p) {
  if (!(p.trap_freq > 0)) return InitialGuess::Uniform;
  if (!(p.g_contact > 0)) return InitialGuess::Gaussian;
  // Thomas-Fermi once the chemical potential exceeds the level spacing.
  const double gn = p.g_contact * p.n_atoms;
  const double mu_tf = std::pow(3.0 * gn * p.trap_freq / (4.0 * std::sqrt(2.0)), 2.0 / 3.0);
  return mu_tf > p.trap_freq ? InitialGuess::ThomasFermi : InitialGuess::Gaussian;
}

double atomic_energy(const CField& state, const SystemParams& p, const Grid& grid) {
  SpectralTransform fft(grid.n_points);
  const auto modes = mode_amplitudes(state, grid, fft);
  double e = 0.0;
  for (std::size_t m = 0; m < grid.n_points; ++m) {
    e += 0.5 * grid.wavenumbers[m] * grid.wavenumbers[m] * std::norm(modes[m]);
  }
  const double gn = p.g_contact * p.n_atoms;
  double local = 0.0;
  for (std::size_t j = 0; j < grid.n_points; ++j) {
    const double z = grid.positions[j];
    const double rho = std::norm(state.psi[j]);
    local += rho * (0.5 * p.trap_freq * p.trap_freq * z * z + 0.5 * gn * rho);
  }
  return e + local * grid.spacing;
}

namespace {

CField from_density(const std::vector<double>& rho, const Grid& grid) {
  CField s;
  s.psi.resize(grid.n_points);
  for (std::size_t j = 0; j < grid.n_points; ++j) s.psi[j] = std::sqrt(rho[j]);
  const double scale = 1.0 / std::sqrt(norm(s, grid));
  for (auto& v : s.psi) v *= scale;
  return s;
}

double edge_ratio(const CField& s) {
  double peak = 0.0;
  for (const auto& v : s.psi) peak = std::max(peak, std::norm(v));
  const double edge = std::max(std::norm(s.psi.front()), std::norm(s.psi.back()));
  return peak > 0 ? edge / peak : 0.0;
}

}  // namespace

GroundStateResult ground_state(const SystemParams& p, const Grid& grid,
                               const GroundStateOptions& opt) {
  p.validate();
  GroundStateResult res;
  res.guess = choose_initial_guess(p);
  switch (res.guess) {
    case InitialGuess::Uniform:
      res.state = uniform_state(grid);
      break;
    case InitialGuess::Gaussian:
      res.state = from_density(gaussian_density(p, grid), grid);
      break;
    case InitialGuess::ThomasFermi:
      res.state = from_density(thomas_fermi_density(p, grid), grid);
      break;
  }
  if (res.guess == InitialGuess::Uniform) {
    // A homogeneous state is already stationary without a trap.
    res.energy_per_particle = atomic_energy(res.state, p, grid);
    return res;
  }

  const std::size_t n = grid.n_points;
  const double gn = p.g_contact * p.n_atoms;
  const double w = p.trap_freq;
  SpectralTransform fft(n);
  std::vector<double> kin_half(n), trap(n);
  for (std::size_t j = 0; j < n; ++j) {
    kin_half[j] = std::exp(-0.25 * grid.wavenumbers[j] * grid.wavenumbers[j] * opt.dtau);
    trap[j] = 0.5 * w * w * grid.positions[j] * grid.positions[j];
  }

  auto& psi = res.state.psi;
  double e_prev = atomic_energy(res.state, p, grid);
  for (long step = 1; step <= opt.max_steps; ++step) {
    fft.forward(psi);
    for (std::size_t m = 0; m < n; ++m) psi[m] *= kin_half[m];
    fft.backward(psi);
    for (std::size_t j = 0; j < n; ++j) psi[j] *= std::exp(-opt.dtau * (trap[j] + gn * std::norm(psi[j])));
    fft.forward(psi);
    for (std::size_t m = 0; m < n; ++m) psi[m] *= kin_half[m];
    fft.backward(psi);
    const double scale = 1.0 / std::sqrt(norm(res.state, grid));
    for (auto& v : psi) v *= scale;

    if (step % opt.check_every == 0) {
      check_finite(res.state, "ground_state");
      const double e = atomic_energy(res.state, p, grid);
      const double rate = std::abs(e - e_prev) / (std::abs(e) * opt.dtau * opt.check_every);
      e_prev = e;
      if (rate < opt.tol) {
        res.steps = step;
        res.energy_per_particle = e;
        res.edge_ratio = edge_ratio(res.state);
        res.edge_flagged = res.edge_ratio > kEdgeRatioLimit;
        return res;
      }
    }
  }
  throw NumericalError("ground_state: no convergence within " + std::to_string(opt.max_steps) +
                       " imaginary-time steps");
}

double realtime_density_change(const CField& state, const SystemParams& p, const Grid& grid,
                               double duration, double dt) {
  EomContext ctx;
  ctx.params = p;
  ctx.grid = grid;
  ctx.pump.ramp_duration = 1.0;
  ctx.pump.hold_end = 1.0;
  ctx.pump.epsilon0 = 0.0;
  ctx.dt = dt;
  ctx.noise_on = false;
  ctx.wigner_sampling_on = false;
  Integrator integ(ctx);
  CField s = state;
  s.alpha = 0.0;
  s.time = 0.0;
  integ.advance(s, std::lround(duration / dt), nullptr);
  double diff = 0.0, ref = 0.0;
  for (std::size_t j = 0; j < grid.n_points; ++j) {
    const double r0 = std::norm(state.psi[j]);
    const double d = std::norm(s.psi[j]) - r0;
    diff += d * d;
    ref += r0 * r0;
  }
  return std::sqrt(diff / ref);
}

}  // namespace cavitydtc

#include "cavitydtc/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "cavitydtc/errors.hpp"

namespace cavitydtc {

namespace {

constexpr cplx kI{0.0, 1.0};

// e^x - 1 without cancellation for small |x|.
cplx expm1(cplx x) {
  const double s_half = std::sin(0.5 * x.imag());
  const double em1 = std::expm1(x.real());
  return {em1 * std::cos(x.imag()) - 2.0 * s_half * s_half, (em1 + 1.0) * std::sin(x.imag())};
}

// phi1(x) = (e^x - 1) / x and phi2(x) = (e^x - 1 - x) / x^2.
cplx phi1(cplx x) {
  if (x == cplx(0.0, 0.0)) return 1.0;
  return expm1(x) / x;
}

cplx phi2(cplx x) {
  if (std::abs(x) < 0.1) {
    cplx term = 0.5, sum = 0.0;
    for (int n = 1; n <= 14; ++n) {
      sum += term;
      term *= x / static_cast<double>(n + 2);
    }
    return sum;
  }
  return (std::exp(x) - 1.0 - x) / (x * x);
}

// Gauss-Legendre nodes/weights on [-1, 1].
constexpr std::array<double, 6> kGlNodes{-0.9324695142031521, -0.6612093864662645,
                                         -0.2386191860831969, 0.2386191860831969,
                                         0.6612093864662645,  0.9324695142031521};
constexpr std::array<double, 6> kGlWeights{0.1713244923791704, 0.3607615730481386,
                                           0.4679139345726910, 0.4679139345726910,
                                           0.3607615730481386, 0.1713244923791704};

// exp(i x), with a Taylor series for the small contact phases of a single step.
inline cplx unit_phase(double x) {
  if (std::abs(x) < 0.05) {
    const double x2 = x * x;
    const double c = 1.0 - x2 / 2.0 * (1.0 - x2 / 12.0 * (1.0 - x2 / 30.0 * (1.0 - x2 / 56.0)));
    const double s = x * (1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0))));
    return {c, s};
  }
  return {std::cos(x), std::sin(x)};
}

struct CavityFlow {
  cplx alpha_end;
  double int_re_alpha;   // integral of Re(alpha) over the step
  double int_photons;    // integral of |alpha|^2 over the step
};

// Exact solution of d alpha/dt = lambda alpha + c over [0, h].
CavityFlow cavity_flow(cplx alpha0, cplx lambda, cplx c, double h) {
  const cplx x = lambda * h;
  CavityFlow f{};
  f.alpha_end = alpha0 * (expm1(x) + 1.0) + c * h * phi1(x);
  f.int_re_alpha = (alpha0 * h * phi1(x) + c * h * h * phi2(x)).real();
  if (std::abs(x) <= 0.5) {
    double acc = 0.0;
    for (std::size_t q = 0; q < kGlNodes.size(); ++q) {
      const double tq = 0.5 * h * (kGlNodes[q] + 1.0);
      const cplx xq = lambda * tq;
      const cplx em1 = expm1(xq);
      const cplx a = alpha0 * (em1 + 1.0) + c * (xq == cplx(0.0, 0.0) ? tq : em1 / lambda);
      acc += kGlWeights[q] * std::norm(a);
    }
    f.int_photons = 0.5 * h * acc;
  } else {
    // alpha(t) = A + beta e^{lambda t}
    const cplx a_fixed = -c / lambda;
    const cplx beta = alpha0 - a_fixed;
    const double kappa = -lambda.real();
    f.int_photons = std::norm(a_fixed) * h + 2.0 * (std::conj(a_fixed) * beta * h * phi1(x)).real() +
                    std::norm(beta) * h * phi1(cplx(-2.0 * kappa * h, 0.0)).real();
  }
  return f;
}

}  // namespace

void EomContext::validate() const {
  params.validate();
  pump.validate();
  if (!(dt > 0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
  double k_max = 0.0;
  for (double k : grid.wavenumbers) k_max = std::max(k_max, std::abs(k));
  const double kinetic = kRecoilFreq * (k_max / kWaveNumber) * (k_max / kWaveNumber);
  const double rate = std::max({std::abs(params.delta_c()), params.kappa, kinetic});
  if (splitting_order != 2 && splitting_order != 4) throw ConfigError("splitting order must be 2 or 4");
  // the backward triple-jump sub-step is the longest
  const double longest = splitting_order == 4 ? (std::cbrt(2.0) / (2.0 - std::cbrt(2.0))) * dt : dt;
  if (longest * rate >= kStabilityBound) {
    throw ConfigError("dt = " + std::to_string(dt) + " exceeds the stability bound (dt * rate = " +
                      std::to_string(longest * rate) + ")");
  }
}

double pump_coupling(const SystemParams& p, double epsilon) {
  return -std::sqrt(std::max(epsilon, 0.0) * std::abs(p.u0));
}

void check_finite(const CField& state, const char* where) {
  if (!is_finite(state)) {
    throw NumericalError(std::string("non-finite state in ") + where + " at t = " +
                         std::to_string(state.time));
  }
}

Drift drift(const CField& state, double t, const EomContext& ctx) {
  check_finite(state, "drift");
  const auto& p = ctx.params;
  const auto& g = ctx.grid;
  const double cp = pump_coupling(p, epsilon_at(ctx.pump, t));
  const double theta = order_parameter(state, g);
  const double b = bunching(state, g);
  const double photons = std::norm(state.alpha);
  const double gn = p.g_contact * p.n_atoms;

  SpectralTransform fft(g.n_points);
  std::vector<cplx> kin = state.psi;
  fft.forward(kin);
  for (std::size_t m = 0; m < g.n_points; ++m) kin[m] *= 0.5 * g.wavenumbers[m] * g.wavenumbers[m];
  fft.backward(kin);

  Drift d;
  d.dpsi.resize(g.n_points);
  for (std::size_t j = 0; j < g.n_points; ++j) {
    const double z = g.positions[j];
    const double c = std::cos(kWaveNumber * z);
    const double v = 0.5 * p.trap_freq * p.trap_freq * z * z + gn * std::norm(state.psi[j]) +
                     p.u0 * c * c * photons + 2.0 * cp * c * state.alpha.real();
    d.dpsi[j] = -kI * (kin[j] + v * state.psi[j]);
  }
  d.dalpha = kI * (p.delta_c() - p.u0 * p.n_atoms * b) * state.alpha -
             kI * cp * p.n_atoms * theta - p.kappa * state.alpha;
  return d;
}

double energy(const CField& state, double t, const EomContext& ctx) {
  const auto& p = ctx.params;
  const auto& g = ctx.grid;
  const double cp = pump_coupling(p, epsilon_at(ctx.pump, t));
  SpectralTransform fft(g.n_points);
  const auto modes = mode_amplitudes(state, g, fft);
  double kinetic = 0.0;
  for (std::size_t m = 0; m < g.n_points; ++m) {
    kinetic += 0.5 * g.wavenumbers[m] * g.wavenumbers[m] * std::norm(modes[m]);
  }
  const double photons = std::norm(state.alpha);
  const double gn = p.g_contact * p.n_atoms;
  double local = 0.0;
  for (std::size_t j = 0; j < g.n_points; ++j) {
    const double z = g.positions[j];
    const double c = std::cos(kWaveNumber * z);
    const double rho = std::norm(state.psi[j]);
    local += rho * (0.5 * p.trap_freq * p.trap_freq * z * z + 0.5 * gn * rho +
                    p.u0 * c * c * photons + 2.0 * cp * c * state.alpha.real());
  }
  local *= g.spacing;
  return p.n_atoms * (kinetic + local) - p.delta_c() * photons;
}

Integrator::Integrator(EomContext ctx)
    : ctx_(std::move(ctx)), fft_(ctx_.grid.n_points), work_(ctx_.grid.n_points) {
  ctx_.validate();
  const auto& g = ctx_.grid;
  const std::size_t n = g.n_points;
  const double h = ctx_.dt;
  if (ctx_.splitting_order == 4) {
    // triple jump: w1, w0, w1 with 2 w1 + w0 = 1
    const double w1 = 1.0 / (2.0 - std::cbrt(2.0));
    const double w0 = 1.0 - 2.0 * w1;
    subs_ = {{w1 * h, 0.5 * w1 * h}, {w0 * h, (w1 + 0.5 * w0) * h}, {w1 * h, (1.0 - 0.5 * w1) * h}};
  } else {
    subs_ = {{h, 0.5 * h}};
  }
  cos_kz_.resize(n);
  cos2_kz_.resize(n);
  trap_.resize(n);
  cell_phase_.resize(g.points_per_cell());
  const double w = ctx_.params.trap_freq;
  for (std::size_t j = 0; j < n; ++j) {
    const double z = g.positions[j];
    cos_kz_[j] = std::cos(kWaveNumber * z);
    cos2_kz_[j] = cos_kz_[j] * cos_kz_[j];
    trap_[j] = 0.5 * w * w * z * z;
  }
  // Kinetic flows between potential sub-steps. Entry 0 opens a run of steps,
  // entry i > 0 sits before sub-step i, and the last entry fuses the closing
  // half of one step with the opening half of the next.
  auto kin_table = [&](double tau) {
    std::vector<cplx> ph(n);
    for (std::size_t m = 0; m < n; ++m) {
      const double e_kin = 0.5 * g.wavenumbers[m] * g.wavenumbers[m];
      // the 1/n of the inverse transform is folded into the phases
      ph[m] = std::polar(1.0, -e_kin * tau) / static_cast<double>(n);
    }
    return ph;
  };
  kin_.push_back(kin_table(0.5 * subs_.front().h));
  for (std::size_t i = 1; i < subs_.size(); ++i) kin_.push_back(kin_table(0.5 * (subs_[i - 1].h + subs_[i].h)));
  kin_.push_back(kin_table(0.5 * (subs_.back().h + subs_.front().h)));
  for (const auto& sub : subs_) {
    std::vector<cplx> ph(n);
    for (std::size_t j = 0; j < n; ++j) ph[j] = std::polar(1.0, -trap_[j] * sub.h);
    trap_phase_.push_back(std::move(ph));
  }
}

void Integrator::kinetic(const std::vector<cplx>& phases) {
  const auto psi = work_.span();
  fft_.forward(psi);
  for (std::size_t m = 0; m < psi.size(); ++m) psi[m] *= phases[m];
  fft_.backward_unscaled(psi);
}

void Integrator::potential(cplx& alpha, double t_mid, double h, const std::vector<cplx>& trap_phase) {
  const auto& p = ctx_.params;
  const auto psi = work_.span();
  const std::size_t n = psi.size();
  const double dz = ctx_.grid.spacing;

  double theta = 0.0, b = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double rho = std::norm(psi[j]);
    theta += cos_kz_[j] * rho;
    b += cos2_kz_[j] * rho;
  }
  theta *= dz;
  b *= dz;

  const double cp = pump_coupling(p, epsilon_at(ctx_.pump, t_mid));
  const cplx lambda(-p.kappa, p.delta_c() - p.u0 * p.n_atoms * b);
  const cplx drive = -kI * cp * p.n_atoms * theta;
  const CavityFlow flow = cavity_flow(alpha, lambda, drive, h);

  const double gn = p.g_contact * p.n_atoms;
  const double a_cos2 = p.u0 * flow.int_photons;
  const double a_cos = 2.0 * cp * flow.int_re_alpha;
  // cos(kz) repeats every cell, so the cavity phase has only ppc distinct values.
  const std::size_t ppc = cell_phase_.size();
  for (std::size_t q = 0; q < ppc; ++q) {
    const double phase = -(a_cos2 * cos2_kz_[q] + a_cos * cos_kz_[q]);
    cell_phase_[q] = cplx(std::cos(phase), std::sin(phase));
  }
  const double contact = -h * gn;
  for (std::size_t j = 0, q = 0; j < n; ++j) {
    cplx factor = cell_phase_[q] * trap_phase[j];
    if (gn != 0.0) factor *= unit_phase(contact * std::norm(psi[j]));
    psi[j] *= factor;
    if (++q == ppc) q = 0;
  }
  alpha = flow.alpha_end;
}

void Integrator::step(CField& state, Rng* noise) { advance(state, 1, noise); }

void Integrator::advance(CField& state, long n, Rng* noise) {
  if (n <= 0) return;
  const double t_start = state.time;
  const double h = ctx_.dt;
  const auto& p = ctx_.params;
  const bool noisy = ctx_.noise_on && p.kappa > 0;
  if (noisy && noise == nullptr) throw std::invalid_argument("Integrator: noise enabled but no Rng given");
  if (state.psi.size() != work_.size()) throw std::invalid_argument("Integrator: grid mismatch");
  const double noise_scale = std::sqrt(0.5 * p.kappa * h);
  std::copy(state.psi.begin(), state.psi.end(), work_.span().begin());
  kinetic(kin_.front());
  for (long i = 0; i < n; ++i) {
    const double t = t_start + static_cast<double>(i) * h;
    for (std::size_t k = 0; k < subs_.size(); ++k) {
      if (k > 0) kinetic(kin_[k]);
      potential(state.alpha, t + subs_[k].t_mid, subs_[k].h, trap_phase_[k]);
    }
    // Euler-Maruyama cavity noise once per full step
    if (noisy) state.alpha += noise_scale * noise->normal_pair();
    if (i + 1 < n) kinetic(kin_.back());
  }
  kinetic(kin_.front());  // the composition is symmetric
  std::copy(work_.span().begin(), work_.span().end(), state.psi.begin());
  state.time = t_start + static_cast<double>(n) * h;
  check_finite(state, "Integrator::advance");
}

CField sample_initial(const CField& state0, const EomContext& ctx, std::uint64_t seed) {
  Rng rng(seed);
  return sample_initial(state0, ctx, rng);
}

CField sample_initial(const CField& state0, const EomContext& ctx, Rng& rng) {
  if (!ctx.wigner_sampling_on) return state0;
  const auto& g = ctx.grid;
  const double sqrt_n = std::sqrt(ctx.params.n_atoms);
  CField out = state0;
  out.alpha += 0.5 * rng.normal_pair();

  SpectralTransform fft(g.n_points);
  auto modes = mode_amplitudes(state0, g, fft);
  for (auto& c : modes) c += 0.5 * rng.normal_pair() / sqrt_n;
  const double inv_scale = std::sqrt(static_cast<double>(g.n_points) / g.spacing);
  for (auto& c : modes) c *= inv_scale;
  fft.backward(modes);
  out.psi = std::move(modes);
  return out;
}

CField seed_density_wave(const CField& state, const Grid& grid, double amplitude) {
  CField out = state;
  for (std::size_t j = 0; j < grid.n_points; ++j) {
    out.psi[j] *= 1.0 + amplitude * std::cos(kWaveNumber * grid.positions[j]);
  }
  const double scale = 1.0 / std::sqrt(norm(out, grid));
  for (auto& v : out.psi) v *= scale;
  return out;
}

}  // namespace cavitydtc

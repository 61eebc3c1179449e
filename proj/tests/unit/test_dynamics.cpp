#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "cavitydtc/dynamics.hpp"
#include "cavitydtc/errors.hpp"
#include "cavitydtc/protocol.hpp"

using namespace cavitydtc;

namespace {

PumpSchedule static_pump(double eps) {
  PumpSchedule s;
  s.ramp_duration = 1e-12;
  s.hold_end = 1e9;
  s.epsilon0 = eps;
  s.omega_d = 1.0;
  s.drive_cycles = 0;
  return s;
}

EomContext make_ctx(const SystemParams& p, const Grid& g, double eps, double dt) {
  EomContext c;
  c.params = p;
  c.grid = g;
  c.pump = static_pump(eps);
  c.dt = dt;
  c.noise_on = false;
  c.wigner_sampling_on = false;
  return c;
}

CField random_state(const Grid& g, std::uint64_t seed, double alpha_scale) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  CField s;
  s.psi.resize(g.n_points);
  for (std::size_t j = 0; j < g.n_points; ++j) s.psi[j] = cplx(1.0 + 0.3 * n(gen), 0.3 * n(gen));
  const double nrm = std::sqrt(norm(s, g));
  for (auto& v : s.psi) v /= nrm;
  s.alpha = alpha_scale * cplx(n(gen), n(gen));
  s.time = 1.0;
  return s;
}

// Band-limited state: a few low harmonics on the uniform background.
CField smooth_state(const Grid& g, cplx alpha) {
  CField s;
  s.psi.resize(g.n_points);
  for (std::size_t j = 0; j < g.n_points; ++j) {
    const double z = g.positions[j];
    s.psi[j] = 1.0 + 0.3 * std::cos(kWaveNumber * z + 0.4) + cplx(0, 0.2) * std::sin(kPi * z) +
               0.1 * std::cos(2 * kWaveNumber * z);
  }
  const double nrm = std::sqrt(norm(s, g));
  for (auto& v : s.psi) v /= nrm;
  s.alpha = alpha;
  s.time = 1.0;
  return s;
}

double max_abs_diff(const CField& a, const CField& b) {
  double d = std::abs(a.alpha - b.alpha);
  for (std::size_t j = 0; j < a.psi.size(); ++j) d = std::max(d, std::abs(a.psi[j] - b.psi[j]));
  return d;
}

}  // namespace

TEST_CASE("drift is the Wirtinger gradient of the c-number Hamiltonian") {
  // psi' = -i/(N dz) dE/dpsi*, alpha' = -i dE/dalpha* - kappa alpha
  auto p = set_osc_length(set_interaction_energy(default_experiment_params(), 0.5), 0.8);
  const auto g = make_grid(2, 16);
  const auto ctx = make_ctx(p, g, 1.3 * homogeneous_threshold_estimate(p), 1e-4);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto s = random_state(g, seed, 3.0);
    const auto d = drift(s, s.time, ctx);
    auto grad = [&](auto&& perturb) {
      const double h = 1e-5;
      CField a = s, b = s;
      perturb(a, h);
      perturb(b, -h);
      return (energy(a, s.time, ctx) - energy(b, s.time, ctx)) / (2 * h);
    };
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < g.n_points; ++j) {
      const double dx = grad([&](CField& c, double h) { c.psi[j] += h; });
      const double dy = grad([&](CField& c, double h) { c.psi[j] += cplx(0, h); });
      const cplx expect = -cplx(0, 1) * 0.5 * cplx(dx, dy) / (p.n_atoms * g.spacing);
      num += std::norm(expect - d.dpsi[j]);
      den += std::norm(d.dpsi[j]);
    }
    CHECK(std::sqrt(num / den) < 1e-6);
    const double ax = grad([](CField& c, double h) { c.alpha += h; });
    const double ay = grad([](CField& c, double h) { c.alpha += cplx(0, h); });
    const cplx expect_a = -cplx(0, 1) * 0.5 * cplx(ax, ay) - p.kappa * s.alpha;
    CHECK(std::abs(expect_a - d.dalpha) / std::abs(d.dalpha) < 1e-6);
  }
}

TEST_CASE("empty pump: cavity decays with the dispersively shifted detuning") {
  const auto p = default_experiment_params();
  const auto g = make_grid(2, 16);
  auto ctx = make_ctx(p, g, 0.0, 1e-3);
  Integrator integ(ctx);
  CField s = uniform_state(g);
  const cplx a0(1e-4, -2e-4);
  s.alpha = a0;
  s.time = 1.0;
  integ.advance(s, 200, nullptr);
  const double t = 200 * ctx.dt;
  const cplx expect = a0 * std::exp(cplx(-p.kappa, p.delta_c() - p.u0 * p.n_atoms * 0.5) * t);
  CHECK(std::abs(s.alpha - expect) / std::abs(expect) < 1e-9);
}

TEST_CASE("norm is conserved with noise and Wigner sampling") {
  auto p = set_interaction_energy(default_experiment_params(), 1.0);
  const auto g = make_grid(4, 16);
  auto ctx = make_ctx(p, g, 1.5 * homogeneous_threshold_estimate(p), 2e-3);
  ctx.noise_on = true;
  ctx.wigner_sampling_on = true;
  Integrator integ(ctx);
  Rng rng(5);
  auto s = sample_initial(uniform_state(g), ctx, rng);
  s.time = 1.0;
  const double n0 = norm(s, g);
  integ.advance(s, 2000, &rng);
  CHECK(std::abs(norm(s, g) - n0) < 1e-12);
}

TEST_CASE("half-period translation commutes with the mean-field flow") {
  auto p = set_interaction_energy(default_experiment_params(), 0.4);
  const auto g = make_grid(3, 16);
  const auto ctx = make_ctx(p, g, 1.4 * homogeneous_threshold_estimate(p), 1e-3);
  Integrator integ(ctx);
  auto a = random_state(g, 9, 5.0);
  auto b = translate_half_period(a, g);
  integ.advance(a, 300, nullptr);
  integ.advance(b, 300, nullptr);
  CHECK(max_abs_diff(translate_half_period(a, g), b) < 1e-10);
}

TEST_CASE("advance(n) matches n single steps") {
  auto p = set_osc_length(default_experiment_params(), 1.5);
  const auto g = make_grid(4, 16);
  auto ctx = make_ctx(p, g, 1.2 * homogeneous_threshold_estimate(p), 1e-3);
  ctx.noise_on = true;
  Integrator integ(ctx);
  auto a = random_state(g, 4, 2.0);
  auto b = a;
  Rng ra(1), rb(1);
  integ.advance(a, 50, &ra);
  for (int i = 0; i < 50; ++i) integ.step(b, &rb);
  CHECK(max_abs_diff(a, b) < 1e-11);
  CHECK(a.time == doctest::Approx(b.time));
}

TEST_CASE("energy error of the splitting shrinks as dt^2") {
  auto p = set_interaction_energy(default_experiment_params(), 0.5);
  p.kappa = 0.0;
  const auto g = make_grid(2, 16);
  auto run = [&](double dt, int order = 2) {
    auto ctx = make_ctx(p, g, 1.3 * homogeneous_threshold_estimate(p), dt);
    ctx.splitting_order = order;
    Integrator integ(ctx);
    auto s = smooth_state(g, {3.0, -2.0});
    const double e0 = energy(s, s.time, ctx);
    integ.advance(s, static_cast<long>(std::lround(0.2 / dt)), nullptr);
    return std::abs(energy(s, s.time, ctx) - e0) / std::abs(e0);
  };
  const double e1 = run(2e-3);
  const double e2 = run(1e-3);
  CHECK(e1 < 1e-3);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.25));
  const double f1 = run(1e-3, 4);
  const double f2 = run(5e-4, 4);
  CHECK(f1 < e2);
  CHECK(f1 / f2 == doctest::Approx(16.0).epsilon(0.25));
}

TEST_CASE("fourth-order composition agrees with fine Strang steps") {
  auto p = set_osc_length(set_interaction_energy(default_experiment_params(), 0.5), 1.5);
  const auto g = make_grid(4, 16);
  auto ctx = make_ctx(p, g, 1.3 * homogeneous_threshold_estimate(p), 1e-3);
  ctx.pump.f_d = 0.5;
  ctx.pump.omega_d = 20.0;
  ctx.pump.hold_end = 1.0;
  auto fine = ctx;
  fine.dt = 1e-3 / 64;
  ctx.splitting_order = 4;
  Integrator coarse4(ctx), fine2(fine);
  auto a = smooth_state(g, {2.0, 1.0});
  auto b = a;
  coarse4.advance(a, 200, nullptr);
  fine2.advance(b, 200 * 64, nullptr);
  CHECK(max_abs_diff(a, b) < 1e-5);
  CHECK(a.time == doctest::Approx(b.time));
  ctx.splitting_order = 3;
  CHECK_THROWS_AS(ctx.validate(), ConfigError);
}

TEST_CASE("time step beyond the stability bound is rejected") {
  const auto p = default_experiment_params();
  const auto g = make_grid(2, 16);
  auto ctx = make_ctx(p, g, 1.0, 0.1);
  CHECK_THROWS_AS(ctx.validate(), ConfigError);
  CHECK_THROWS_AS(Integrator{ctx}, ConfigError);
  ctx.dt = -1e-3;
  CHECK_THROWS_AS(ctx.validate(), ConfigError);
}

TEST_CASE("non-finite state aborts the integration") {
  const auto p = default_experiment_params();
  const auto g = make_grid(1, 16);
  Integrator integ(make_ctx(p, g, 1.0, 1e-3));
  auto s = uniform_state(g);
  s.time = 1.0;
  s.psi[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(integ.advance(s, 5, nullptr), NumericalError);
  CHECK_THROWS_AS(check_finite(s, "test"), NumericalError);
}

TEST_CASE("noise increments have E|dW|^2 = kappa dt (chi-square)") {
  const auto p = default_experiment_params();
  const auto g = make_grid(1, 16);
  auto ctx = make_ctx(p, g, 0.0, 1e-3);
  ctx.noise_on = true;
  Integrator integ(ctx);
  Rng rng(2024);
  const int n = 100000;
  double chi2 = 0.0;
  auto s = uniform_state(g);
  for (int i = 0; i < n; ++i) {
    s.alpha = 0.0;
    s.time = 1.0;
    integ.step(s, &rng);
    chi2 += std::norm(s.alpha) / (p.kappa * ctx.dt / 2);  // two quadratures, each variance kappa dt / 2
  }
  const double dof = 2.0 * n;
  const double z = (chi2 - dof) / std::sqrt(2 * dof);
  CHECK(std::abs(z) < 2.576);  // two-sided p > 0.01
}

TEST_CASE("Wigner sampling of the empty cavity gives mean |alpha|^2 = 1/2") {
  const auto p = default_experiment_params();
  const auto g = make_grid(1, 16);
  auto ctx = make_ctx(p, g, 0.0, 1e-3);
  ctx.wigner_sampling_on = true;
  Rng rng(77);
  const int n = 20000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = std::norm(sample_initial(uniform_state(g), ctx, rng).alpha);
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  const double sigma = std::sqrt((sum2 / n - mean * mean) / n);
  CHECK(std::abs(mean - 0.5) < 3 * sigma);
}

TEST_CASE("Wigner sampling off returns the input and seeds are reproducible") {
  const auto p = default_experiment_params();
  const auto g = make_grid(2, 16);
  auto ctx = make_ctx(p, g, 0.0, 1e-3);
  const auto s0 = uniform_state(g);
  CHECK(max_abs_diff(sample_initial(s0, ctx, 3), s0) == 0.0);
  ctx.wigner_sampling_on = true;
  CHECK(max_abs_diff(sample_initial(s0, ctx, 3), sample_initial(s0, ctx, 3)) == 0.0);
  CHECK(max_abs_diff(sample_initial(s0, ctx, 3), sample_initial(s0, ctx, 4)) > 0.0);
}

TEST_CASE("density-wave seed breaks the symmetry toward the even state") {
  const auto g = make_grid(2, 16);
  const auto s = seed_density_wave(uniform_state(g), g, 1e-3);
  CHECK(norm(s, g) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(order_parameter(s, g) == doctest::Approx(1e-3).epsilon(1e-3));
}

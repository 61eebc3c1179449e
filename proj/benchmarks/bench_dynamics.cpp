#include <benchmark/benchmark.h>

#include <cmath>

#include "cavitydtc/analysis.hpp"
#include "cavitydtc/dynamics.hpp"
#include "cavitydtc/ground_state.hpp"

using namespace cavitydtc;

namespace {

EomContext driven_context(int n_cells, int order) {
  EomContext c;
  c.params = set_interaction_energy(set_osc_length(default_experiment_params(), 3.5), 0.26);
  c.grid = make_grid(n_cells, 16);
  c.pump = make_schedule(c.params, 1.02 * homogeneous_threshold_estimate(c.params), 0.5, 4.0, 100);
  c.dt = c.pump.period() / 512;
  c.splitting_order = order;
  return c;
}

// One full integrator step including cavity noise. Args: cells, splitting order.
void BM_Step(benchmark::State& state) {
  const auto ctx = driven_context(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  Integrator integ(ctx);
  Rng rng(1);
  auto s = sample_initial(uniform_state(ctx.grid), ctx, rng);
  s.time = ctx.pump.hold_end;
  for (auto _ : state) {
    integ.advance(s, 64, &rng);
    benchmark::DoNotOptimize(s.alpha);
  }
  state.SetItemsProcessed(state.iterations() * 64);
  state.counters["points"] = static_cast<double>(ctx.grid.n_points);
}
BENCHMARK(BM_Step)->Args({32, 2})->Args({48, 2})->Args({96, 2})->Args({32, 4});

void BM_Drift(benchmark::State& state) {
  const auto ctx = driven_context(32, 2);
  auto s = uniform_state(ctx.grid);
  s.alpha = {3.0, -1.0};
  for (auto _ : state) benchmark::DoNotOptimize(drift(s, ctx.pump.hold_end, ctx));
}
BENCHMARK(BM_Drift);

void BM_GroundState(benchmark::State& state) {
  const auto ctx = driven_context(static_cast<int>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(ground_state(ctx.params, ctx.grid).energy_per_particle);
}
BENCHMARK(BM_GroundState)->Arg(48)->Unit(benchmark::kMillisecond);

// Correlation, envelope, fit and labels for a 64-trajectory, 100-cycle ensemble.
void BM_Classify(benchmark::State& state) {
  std::vector<TrajectoryRecord> recs(64);
  Rng rng(3);
  for (auto& r : recs) {
    r.samples_per_period = 32;
    r.period = 1.0;
    r.t0_index = 0;
    const double phase = 0.1 * rng.uniform();
    for (int i = 0; i <= 100 * 32; ++i) {
      const double t = i / 32.0;
      const double a = std::exp(-t / 40.0) * std::sin(kPi * t + phase);
      r.times.push_back(t);
      r.theta.push_back(0.5 * a);
      r.alpha.push_back({a, 0.1 * a});
      r.photons.push_back(std::norm(r.alpha.back()));
    }
  }
  for (auto _ : state) benchmark::DoNotOptimize(classify(recs).label);
}
BENCHMARK(BM_Classify)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

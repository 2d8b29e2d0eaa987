#include <benchmark/benchmark.h>

#include "mmf/diagnostics.hpp"
#include "mmf/flow.hpp"
#include "mmf/random_fields.hpp"
#include "mmf/scenario.hpp"

using namespace mmf;

namespace {

ScenarioConfig setup(int n, int nm) {
  ScenarioConfig c;
  c.grid = Grid2D::square(n);
  c.manifold = MicroManifold{nm, 2.0};
  c.params.delta = 0.1;
  c.params.b = 1.0;
  c.initial.preset = "aligned-f";
  return c;
}

void BM_Fft(benchmark::State& state) {
  const Grid2D g = Grid2D::square(static_cast<int>(state.range(0)));
  const ScalarField2D f = random_band_limited(g, {1, 8, 1.0, 1.0}, 1);
  for (auto _ : state) {
    Spectrum2D s = f.spectrum();
    benchmark::DoNotOptimize(ScalarField2D::from_spectrum(s));
  }
}
BENCHMARK(BM_Fft)->Arg(64)->Arg(128)->Arg(256);

void BM_NseStep(benchmark::State& state) {
  const ScenarioConfig c = setup(static_cast<int>(state.range(0)), 16);
  const SimulationState s = initial_state(c);
  const FlowState flow = FlowState::from_vorticity(s.omega);
  for (auto _ : state) benchmark::DoNotOptimize(nse_step(flow, s.sigma, 1e-3));
}
BENCHMARK(BM_NseStep)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);

void BM_FokkerPlanckStep(benchmark::State& state) {
  const ScenarioConfig c = setup(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const SimulationState s = initial_state(c);
  const VectorField2D u = biot_savart(s.omega);
  FokkerPlanckSolver fp(c.grid, c.manifold, c.params);
  for (auto _ : state) benchmark::DoNotOptimize(fp.step(s.f, u, 1e-3));
}
BENCHMARK(BM_FokkerPlanckStep)->Args({64, 32})->Args({128, 64})->Unit(benchmark::kMillisecond);

void BM_StepRecorder(benchmark::State& state) {
  const ScenarioConfig c = setup(static_cast<int>(state.range(0)), 32);
  const SimulationState s = initial_state(c);
  const VectorField2D u = biot_savart(s.omega);
  const StepRecorder rec(c.grid, RecorderOptions{});
  for (auto _ : state) benchmark::DoNotOptimize(rec.measure(0.0, u, s.omega, s.sigma, u, &s.f));
}
BENCHMARK(BM_StepRecorder)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_ComputeN(benchmark::State& state) {
  const ScenarioConfig c = setup(64, static_cast<int>(state.range(0)));
  const SimulationState s = initial_state(c);
  for (auto _ : state) benchmark::DoNotOptimize(compute_N(s.f));
}
BENCHMARK(BM_ComputeN)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

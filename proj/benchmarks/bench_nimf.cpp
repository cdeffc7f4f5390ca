#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "nimf/oracles.hpp"
#include "nimf/rp_potential.hpp"
#include "nimf/saddle.hpp"

using namespace nimf;

namespace {

BeadPath ring(int n, Eigen::Index f, double amplitude) {
  BeadPath p(n, f);
  for (int i = 0; i < n; ++i)
    for (Eigen::Index d = 0; d < f; ++d)
      p.coords()(i, d) = amplitude * std::cos(2.0 * std::numbers::pi * (i + 0.5) / n + 0.3 * d) / (1.0 + d);
  return p;
}

void surface_gradient(benchmark::State& state, SurfaceKind kind) {
  const int n = static_cast<int>(state.range(0));
  const LinearCrossingModel m(1.0, -10.0, 0.01);
  const RingPolymerGrid grid(11.0, n);
  const BeadPath p = ring(n, 1, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(rp_energy_gradient(p, grid, m, kind).energy);
  state.SetComplexityN(n);
}

void spin_boson_gradient(benchmark::State& state) {
  BathSpec spec;
  const SystemBathModel m = discretize_bath(spec, 1.0);
  const RingPolymerGrid grid(1.0, 120);
  const BeadPath p = ring(120, m.dimension(), 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(rp_energy_gradient(p, grid, m, SurfaceKind::nimf).energy);
}

void hessian(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const LinearCrossingModel m(1.0, -1.0, 0.1);
  const RingPolymerGrid grid(11.0, n);
  const BeadPath p = ring(n, 1, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(rp_hessian(p, grid, m, SurfaceKind::nimf).data());
}

void instanton(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const LinearCrossingModel m(1.0, -1.0, 0.1);
  const RingPolymerGrid grid(11.0, n);
  for (auto _ : state) benchmark::DoNotOptimize(find_instanton(m, grid, SurfaceKind::nimf).energy);
}

void transmission_point(benchmark::State& state, ScatteringSolver solver) {
  const LinearCrossingModel m(1.0, -1.0, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(transmission(m, 0.3, -40.0, 40.0, 0.01, solver).cumulative);
}

}  // namespace

BENCHMARK_CAPTURE(surface_gradient, bo, SurfaceKind::bo)->RangeMultiplier(4)->Range(32, 512)->Complexity();
BENCHMARK_CAPTURE(surface_gradient, mf, SurfaceKind::mf)->RangeMultiplier(4)->Range(32, 512)->Complexity();
BENCHMARK_CAPTURE(surface_gradient, nimf, SurfaceKind::nimf)->RangeMultiplier(4)->Range(32, 512)->Complexity();
BENCHMARK(spin_boson_gradient)->Unit(benchmark::kMicrosecond);
BENCHMARK(hessian)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(instanton)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(transmission_point, log_derivative, ScatteringSolver::log_derivative)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(transmission_point, green_function, ScatteringSolver::green_function)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

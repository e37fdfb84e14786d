#include <benchmark/benchmark.h>

#include <vector>

#include "idewave/bounds.hpp"
#include "idewave/convolution.hpp"
#include "idewave/dispersion.hpp"
#include "idewave/kernels.hpp"
#include "idewave/models.hpp"
#include "idewave/spatial_sim.hpp"
#include "idewave/wave_operator.hpp"

using namespace idewave;

static void BM_MinimalSpeed(benchmark::State& state) {
  const Kernel k = Kernel::gaussian(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(minimal_speed(3.0, k));
}
BENCHMARK(BM_MinimalSpeed);

static void BM_CharRoots(benchmark::State& state) {
  const Kernel k = Kernel::triangular(1.5);
  for (auto _ : state) benchmark::DoNotOptimize(char_roots(3.0, k, 2.5));
}
BENCHMARK(BM_CharRoots);

static void BM_Convolve(benchmark::State& state, ConvolutionMethod method) {
  const auto width = static_cast<std::size_t>(state.range(0));
  const std::size_t n = 1 << 14;
  Convolver conv(std::vector<double>(2 * width + 1, 1.0 / (2 * width + 1)), n, method);
  std::vector<double> in(conv.input_size(), 0.5), out(n);
  for (auto _ : state) {
    conv.valid(in.data(), out.data());
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}
BENCHMARK_CAPTURE(BM_Convolve, direct, ConvolutionMethod::direct)->Arg(8)->Arg(64)->Arg(512);
BENCHMARK_CAPTURE(BM_Convolve, fft, ConvolutionMethod::fft)->Arg(8)->Arg(64)->Arg(512);

static void BM_SimulationStep(benchmark::State& state) {
  const SystemModel m = competition2_model(1, 1, 0.3, 0.3, 0.2, 0.2);
  const Kernel k = Kernel::gaussian(1.0);
  const Grid g = sim_grid(1.2, 200, discretize(k, 0.05).radius, 5.0);
  const Simulator sim(m, {k}, g);
  SimState s = sim.indicator({0.6, 0.6}, 5.0);
  for (auto _ : state) sim.step(s);
}
BENCHMARK(BM_SimulationStep)->Unit(benchmark::kMillisecond);

static void BM_WaveApply(benchmark::State& state) {
  const SystemModel m = logistic_model();
  const Kernel k = Kernel::gaussian(1.0);
  const DispersionResult d = analyze(m, {k}, 2.0);
  const BoundPair pair = build_bounds(m, d);
  const WaveOperator op(m, {k}, d, default_grid(d, {k}));
  const WaveProfile up = op.from_bound(pair, true);
  for (auto _ : state) benchmark::DoNotOptimize(op.apply(up));
}
BENCHMARK(BM_WaveApply)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();

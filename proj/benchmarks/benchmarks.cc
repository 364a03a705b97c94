#include <benchmark/benchmark.h>

#include <vector>

#include "spvs/encoders.h"
#include "spvs/metrics.h"
#include "spvs/ops.h"
#include "spvs/progressive.h"
#include "spvs/rng.h"
#include "spvs/segmentation.h"
#include "spvs/tensor.h"

namespace spvs {
namespace {

Tensor Random(Shape shape, Rng& rng) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  std::vector<double> v(n);
  for (double& x : v) x = rng.Uniform(-1.0, 1.0);
  return Tensor::FromData(std::move(shape), std::move(v));
}

void BM_MatMul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Tensor a = Random({n, n}, rng), b = Random({n, n}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(MatMul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}
BENCHMARK(BM_MatMul)->Arg(64)->Arg(128)->Arg(256);

void BM_SummarizerForward(benchmark::State& state) {
  const auto frames = static_cast<std::size_t>(state.range(0));
  EncoderConfig cfg;
  cfg.frame_dim = 64;
  Model model(cfg, 1);
  Rng rng(2);
  const Tensor f = Random({frames, cfg.frame_dim}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(Predict(model, f, 3));
}
BENCHMARK(BM_SummarizerForward)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_KtsSegment(benchmark::State& state) {
  const auto frames = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  const Tensor f = Random({frames, 64}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(KtsSegment(f));
}
BENCHMARK(BM_KtsSegment)->Arg(128)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_Knapsack(benchmark::State& state) {
  const auto shots = static_cast<std::size_t>(state.range(0));
  Rng rng(4);
  std::vector<double> values(shots);
  std::vector<std::size_t> lengths(shots);
  std::size_t total = 0;
  for (std::size_t i = 0; i < shots; ++i) {
    values[i] = rng.Uniform();
    total += lengths[i] = 5 + rng.UniformInt(30);
  }
  for (auto _ : state) benchmark::DoNotOptimize(KnapsackSelect(values, lengths, total * 15 / 100));
}
BENCHMARK(BM_Knapsack)->Arg(16)->Arg(64)->Arg(256);

void BM_KendallTau(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(5);
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = rng.Uniform();
    y[i] = static_cast<double>(rng.UniformInt(10));
  }
  for (auto _ : state) benchmark::DoNotOptimize(KendallTau(x, y));
}
BENCHMARK(BM_KendallTau)->Arg(256)->Arg(4096)->Arg(65536);

}  // namespace
}  // namespace spvs

BENCHMARK_MAIN();

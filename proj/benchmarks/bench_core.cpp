#include <benchmark/benchmark.h>

#include "tain/cs.hpp"
#include "tain/model.hpp"
#include "tain/ops.hpp"
#include "tain/rng.hpp"
#include "tain/runtime.hpp"

namespace {

tain::Tensor<float> uniform(const tain::Shape& shape, std::uint64_t seed) {
  tain::Rng rng(seed);
  std::vector<float> v(tain::shape_numel(shape));
  for (auto& x : v) x = static_cast<float>(rng.uniform());
  return tain::Tensor<float>(shape, std::move(v));
}

void BM_Conv3x3(benchmark::State& state) {
  const auto hw = static_cast<std::size_t>(state.range(0));
  const auto c = static_cast<std::size_t>(state.range(1));
  auto x = uniform({hw, hw, c}, 1);
  auto w = uniform({3, 3, c, c}, 2);
  auto b = uniform({c}, 3);
  tain::NoGradGuard no_grad;
  for (auto _ : state) benchmark::DoNotOptimize(tain::ops::conv2d(x, w, b, 1));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(hw * hw * 9 * c * c));
}
BENCHMARK(BM_Conv3x3)->Args({32, 16})->Args({32, 64})->Args({32, 192})->Unit(benchmark::kMillisecond);

void BM_CrossSimilarity(benchmark::State& state) {
  const auto hw = static_cast<std::size_t>(state.range(0));
  const std::size_t d = 16;
  tain::ParameterSet<float> ps;
  auto p = tain::CSParams<float>::create(ps, "cs", d, true, 1);
  auto y = uniform({hw, hw, d}, 4);
  auto x = uniform({hw, hw, d}, 5);
  tain::NoGradGuard no_grad;
  for (auto _ : state) benchmark::DoNotOptimize(tain::cs_forward(y, x, p));
}
BENCHMARK(BM_CrossSimilarity)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_ToyForward(benchmark::State& state) {
  auto cfg = tain::ModelConfig::toy();
  cfg.enable_cs = state.range(1) != 0;
  cfg.enable_ia = cfg.enable_cs;
  tain::TainModel<float> model(cfg);
  const auto hw = static_cast<std::size_t>(state.range(0));
  auto i0 = uniform({hw, hw, 3}, 6);
  auto i1 = uniform({hw, hw, 3}, 7);
  tain::NoGradGuard no_grad;
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(i0, i1));
}
BENCHMARK(BM_ToyForward)->Args({64, 0})->Args({64, 1})->Args({128, 1})->Unit(benchmark::kMillisecond);

void BM_ToyTrainSample(benchmark::State& state) {
  tain::TainModel<float> model(tain::ModelConfig::toy());
  auto i0 = uniform({64, 64, 3}, 6);
  auto i1 = uniform({64, 64, 3}, 7);
  for (auto _ : state) {
    model.parameters().zero_grad();
    tain::ops::mean(model.forward(i0, i1)).backward();
  }
}
BENCHMARK(BM_ToyTrainSample)->Unit(benchmark::kMillisecond);

}  // namespace

int main(int argc, char** argv) {
  tain::tune_allocator();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}

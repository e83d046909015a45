#include "tain/bench.hpp"

#include <chrono>
#include <cmath>

#include "tain/error.hpp"
#include "tain/rng.hpp"

namespace tain {

TimingStats summarize_timings(std::vector<double> samples_ms) {
  TimingStats stats;
  stats.n = samples_ms.size();
  if (stats.n > 0) {
    double sum = 0.0;
    for (double v : samples_ms) sum += v;
    stats.mean_ms = sum / static_cast<double>(stats.n);
    if (stats.n > 1) {
      double sq = 0.0;
      for (double v : samples_ms) sq += (v - stats.mean_ms) * (v - stats.mean_ms);
      stats.std_ms = std::sqrt(sq / static_cast<double>(stats.n - 1));
    }
  }
  stats.samples_ms = std::move(samples_ms);
  return stats;
}

TimingStats bench_inference(const TainModel<float>& model, const BenchConfig& cfg) {
  if (cfg.n == 0) throw ConfigError("bench: n must be positive");
  const std::size_t s = model.config().s;
  if (cfg.height % s != 0 || cfg.width % s != 0) {
    throw ShapeError("bench: size " + std::to_string(cfg.height) + "x" + std::to_string(cfg.width) +
                     " is not divisible by s=" + std::to_string(s));
  }
  NoGradGuard no_grad;
  const Shape shape{cfg.height, cfg.width, 3};
  const std::size_t numel = shape_numel(shape);
  auto random_frame = [&](Rng& rng) {
    std::vector<float> v(numel);
    for (auto& x : v) x = static_cast<float>(rng.uniform());
    return Tensor<float>(shape, std::move(v));
  };

  std::vector<double> samples;
  samples.reserve(cfg.n);
  for (std::size_t pass = 0; pass < cfg.warmup + cfg.n; ++pass) {
    Rng rng = Rng::derive(cfg.seed, {3, pass});
    const auto i0 = random_frame(rng);
    const auto i1 = random_frame(rng);
    const auto start = std::chrono::steady_clock::now();
    const auto out = model.forward(i0, i1);
    const auto stop = std::chrono::steady_clock::now();
    if (out.numel() == 0) throw Error("bench: empty output");
    if (pass >= cfg.warmup) samples.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
  }
  return summarize_timings(std::move(samples));
}

}  // namespace tain

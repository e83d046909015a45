#pragma once

#include <cstddef>
#include <cstdint>

#include "tain/metrics.hpp"
#include "tain/model.hpp"

namespace tain {

struct BenchConfig {
  std::size_t height = 256;
  std::size_t width = 256;
  std::size_t n = 300;
  std::size_t warmup = 5;  // untimed passes before measuring
  std::uint64_t seed = 0;
};

/// Times `n` forward passes on fresh seeded uniform-random input pairs,
/// wall clock around the forward call only.
TimingStats bench_inference(const TainModel<float>& model, const BenchConfig& cfg = {});

/// Mean and sample standard deviation of `samples_ms`.
TimingStats summarize_timings(std::vector<double> samples_ms);

}  // namespace tain

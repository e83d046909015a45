#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace tain {

/// Seeded random stream. Wraps std::mt19937_64 and maps raw 64-bit draws to
/// distributions itself, so sequences are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream for (seed, keys...), e.g. (seed, epoch) or
  /// (seed, step, item).
  static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> keys);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [lo, hi], inclusive, without modulo bias.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  bool bernoulli(double p) { return p > 0.0 && uniform() < p; }
  /// Standard normal via Box-Muller.
  double normal();

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);
/// FNV-1a, stable across platforms; used to key per-parameter init streams.
std::uint64_t stable_hash(std::string_view text);

}  // namespace tain

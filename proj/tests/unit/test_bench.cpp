#include <doctest.h>

#include <cmath>

#include "tain/bench.hpp"

using namespace tain;

TEST_CASE("summary uses the sample standard deviation") {
  auto s = summarize_timings({2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0});
  CHECK(s.n == 8);
  CHECK(s.mean_ms == 5.0);
  CHECK(s.std_ms == doctest::Approx(std::sqrt(32.0 / 7.0)).epsilon(1e-12));
  CHECK(s.samples_ms.size() == 8);
  auto one = summarize_timings({3.0});
  CHECK(one.mean_ms == 3.0);
  CHECK(one.std_ms == 0.0);
}

TEST_CASE("bench follows the requested protocol") {
  TainModel<float> model(ModelConfig::toy());
  BenchConfig cfg;
  cfg.height = 32;
  cfg.width = 48;
  cfg.n = 12;
  cfg.warmup = 2;
  auto t = bench_inference(model, cfg);
  CHECK(t.n == 12);
  CHECK(t.samples_ms.size() == 12);
  CHECK(t.mean_ms > 0.0);
  CHECK(std::isfinite(t.mean_ms));
  CHECK(t.std_ms >= 0.0);
  CHECK(std::isfinite(t.std_ms));
  for (double v : t.samples_ms) CHECK(v > 0.0);
}

TEST_CASE("larger frames take longer") {
  auto mcfg = ModelConfig::toy();
  mcfg.enable_cs = false;
  mcfg.enable_ia = false;
  TainModel<float> model(mcfg);
  BenchConfig small{64, 64, 10, 2, 0}, large{128, 128, 10, 2, 0};
  CHECK(bench_inference(model, large).mean_ms > bench_inference(model, small).mean_ms);
}

TEST_CASE("bench input errors") {
  TainModel<float> model(ModelConfig::toy());
  CHECK_THROWS_AS(bench_inference(model, {31, 32, 5, 0, 0}), ShapeError);
  CHECK_THROWS_AS(bench_inference(model, {32, 32, 0, 0, 0}), ConfigError);
}

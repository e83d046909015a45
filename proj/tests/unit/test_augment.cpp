#include <doctest.h>

#include "tain/augment.hpp"

using namespace tain;

namespace {

Image noise(std::size_t h, std::size_t w, std::uint64_t seed) {
  Rng rng(seed);
  Image img(h, w);
  for (auto& v : img.pixels) v = static_cast<float>(rng.uniform());
  return img;
}

Triplet noise_triplet(std::size_t h, std::size_t w, std::uint64_t seed, const std::string& id) {
  return {noise(h, w, seed), noise(h, w, seed + 1), noise(h, w, seed + 2), id};
}

bool window_equals(const Image& img, std::size_t y, std::size_t x, const Image& src, std::size_t sy,
                   std::size_t sx, std::size_t k) {
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t c = 0; c < k; ++c)
      for (std::size_t ch = 0; ch < 3; ++ch)
        if (img.at(y + r, x + c, ch) != src.at(sy + r, sx + c, ch)) return false;
  return true;
}

}  // namespace

TEST_CASE("midpoint rounds halves up") {
  CHECK(midpoint_round_half_up(10, 20) == 15);
  CHECK(midpoint_round_half_up(10, 21) == 16);
  CHECK(midpoint_round_half_up(0, 1) == 1);
  CHECK(midpoint_round_half_up(7, 7) == 7);
  CHECK(midpoint_round_half_up(21, 10) == 16);
}

TEST_CASE("hand-placed occluder lands at the midpoint in the middle frame") {
  auto t = noise_triplet(80, 80, 1, "t");
  auto donor = noise(80, 80, 50);
  OccluderPlacement p;
  p.size = 21;
  p.src_y = 3;
  p.src_x = 4;
  p.y0 = 10;
  p.x0 = 0;
  p.y1 = 21;
  p.x1 = 40;
  auto out = paste_occluder(t, donor, p);
  CHECK(p.yt == 16);
  CHECK(p.xt == 20);
  CHECK(window_equals(out.i0, 10, 0, donor, 3, 4, 21));
  CHECK(window_equals(out.it, 16, 20, donor, 3, 4, 21));
  CHECK(window_equals(out.i1, 21, 40, donor, 3, 4, 21));
  // Outside the patch the frames are untouched.
  CHECK(out.it.at(0, 79, 1) == t.it.at(0, 79, 1));
  CHECK(out.i0.at(79, 79, 2) == t.i0.at(79, 79, 2));

  p.y1 = 70;
  CHECK_THROWS_AS(paste_occluder(t, donor, p), ShapeError);
}

TEST_CASE("500 seeded occluders obey the size range and midpoint law") {
  auto t = noise_triplet(96, 112, 1, "target");
  auto donor = noise_triplet(90, 100, 9, "donor");
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    Rng rng(seed);
    auto r = apply_occluder(t, donor, rng);
    REQUIRE(r.placement.has_value());
    const auto& p = *r.placement;
    CHECK(p.size >= 21);
    CHECK(p.size <= 61);
    CHECK(p.yt == (p.y0 + p.y1 + 1) / 2);
    CHECK(p.xt == (p.x0 + p.x1 + 1) / 2);
    CHECK(p.y0 + p.size <= 96);
    CHECK(p.x1 + p.size <= 112);
    CHECK(p.src_y + p.size <= 90);
    CHECK(window_equals(r.triplet.it, p.yt, p.xt, donor.i0, p.src_y, p.src_x, p.size));
    CHECK(window_equals(r.triplet.i0, p.y0, p.x0, donor.i0, p.src_y, p.src_x, p.size));
    CHECK(window_equals(r.triplet.i1, p.y1, p.x1, donor.i0, p.src_y, p.src_x, p.size));
  }
}

TEST_CASE("occluder covers both ends of the size range") {
  auto t = noise_triplet(64, 64, 1, "a");
  auto donor = noise_triplet(64, 64, 2, "b");
  bool lo = false, hi = false;
  for (std::uint64_t seed = 0; seed < 2000 && !(lo && hi); ++seed) {
    Rng rng(seed);
    auto k = apply_occluder(t, donor, rng).placement->size;
    lo |= k == 21;
    hi |= k == 61;
  }
  CHECK(lo);
  CHECK(hi);
}

TEST_CASE("occluder is skipped on small frames and rejects self donors") {
  auto small = noise_triplet(40, 40, 1, "s");
  auto donor = noise_triplet(40, 40, 2, "d");
  Rng rng(0);
  auto r = apply_occluder(small, donor, rng);
  CHECK_FALSE(r.placement.has_value());
  CHECK(r.triplet.i0 == small.i0);
  auto big = noise_triplet(64, 64, 1, "same");
  CHECK_THROWS_AS(apply_occluder(big, big, rng), ConfigError);
}

TEST_CASE("identity augmentation returns the input") {
  auto t = noise_triplet(16, 20, 3, "x");
  Rng rng(1);
  auto out = augment(t, AugmentConfig::identity(), nullptr, rng);
  CHECK(out.i0 == t.i0);
  CHECK(out.it == t.it);
  CHECK(out.i1 == t.i1);
}

TEST_CASE("flips are involutions") {
  auto t = noise_triplet(7, 9, 4, "x");
  auto h = flip_horizontal(t);
  CHECK(h.i0.at(2, 0, 1) == t.i0.at(2, 8, 1));
  CHECK(flip_horizontal(h).i0 == t.i0);
  auto v = flip_vertical(t);
  CHECK(v.it.at(0, 3, 2) == t.it.at(6, 3, 2));
  CHECK(flip_vertical(v).i1 == t.i1);
}

TEST_CASE("augmentation is deterministic in the rng stream") {
  auto t = noise_triplet(80, 80, 5, "x");
  auto donor = noise_triplet(80, 80, 6, "y");
  AugmentConfig cfg;
  cfg.crop_h = 64;
  cfg.crop_w = 72;
  cfg.occluder.enabled = true;
  Rng a(42), b(42), c(43);
  auto oa = augment(t, cfg, &donor, a);
  auto ob = augment(t, cfg, &donor, b);
  auto oc = augment(t, cfg, &donor, c);
  CHECK(oa.i0 == ob.i0);
  CHECK(oa.it == ob.it);
  CHECK(oa.i0.height == 64);
  CHECK(oa.i0.width == 72);
  CHECK_FALSE(oa.i0 == oc.i0);
}

TEST_CASE("one draw of every transform is shared by the three frames") {
  // Identical frames must stay identical after any non-occluding augmentation.
  auto img = noise(48, 40, 7);
  Triplet t{img, img, img, "same"};
  AugmentConfig cfg;
  cfg.crop_h = 32;
  cfg.crop_w = 32;
  cfg.brightness = 0.2;
  cfg.contrast = 0.2;
  cfg.saturation = 0.2;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    auto out = augment(t, cfg, nullptr, rng);
    CHECK(out.i0 == out.it);
    CHECK(out.i1 == out.it);
  }
}

TEST_CASE("augmented values stay in [0,1]") {
  auto t = noise_triplet(64, 64, 8, "x");
  auto donor = noise_triplet(64, 64, 9, "y");
  AugmentConfig cfg;
  cfg.brightness = 0.5;
  cfg.contrast = 0.5;
  cfg.saturation = 0.5;
  cfg.occluder.enabled = true;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    auto out = augment(t, cfg, &donor, rng);
    for (const Image* img : {&out.i0, &out.it, &out.i1})
      for (float v : img->pixels) {
        CHECK(v >= 0.0f);
        CHECK(v <= 1.0f);
      }
  }
}

TEST_CASE("occluders are not applied when inactive") {
  auto t = noise_triplet(64, 64, 8, "x");
  auto donor = noise_triplet(64, 64, 9, "y");
  auto cfg = AugmentConfig::identity();
  cfg.occluder.enabled = true;
  Rng rng(1);
  auto off = augment(t, cfg, &donor, rng, false);
  CHECK(off.i0 == t.i0);
  Rng rng2(1);
  auto on = augment(t, cfg, &donor, rng2, true);
  CHECK_FALSE(on.i0 == t.i0);
}

TEST_CASE("invalid augmentation settings") {
  auto t = noise_triplet(32, 32, 1, "x");
  Rng rng(0);
  AugmentConfig cfg = AugmentConfig::identity();
  cfg.crop_h = 48;
  cfg.crop_w = 16;
  CHECK_THROWS_WITH_AS(augment(t, cfg, nullptr, rng), doctest::Contains("larger than frame"), ConfigError);
  cfg = AugmentConfig::identity();
  cfg.crop_h = 16;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = AugmentConfig::identity();
  cfg.flip_h = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = AugmentConfig::identity();
  cfg.occluder.min_size = 10;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

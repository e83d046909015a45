#include "tain/augment.hpp"

#include <algorithm>

#include "tain/error.hpp"
#include "tain/log.hpp"

namespace tain {

AugmentConfig AugmentConfig::identity() {
  AugmentConfig c;
  c.flip_h = 0.0;
  c.flip_v = 0.0;
  c.brightness = 0.0;
  c.contrast = 0.0;
  c.saturation = 0.0;
  c.occluder.enabled = false;
  return c;
}

void AugmentConfig::validate() const {
  auto prob = [](double p, const char* key) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string("augment.") + key + ": probability must be in [0,1]");
  };
  prob(flip_h, "flip_h");
  prob(flip_v, "flip_v");
  prob(occluder.probability, "occluder.probability");
  if (brightness < 0.0 || contrast < 0.0 || saturation < 0.0) {
    throw ConfigError("augment: jitter amplitudes must be non-negative");
  }
  if ((crop_h == 0) != (crop_w == 0)) throw ConfigError("augment.crop_h/crop_w: set both or neither");
  if (occluder.min_size < 21 || occluder.min_size > occluder.max_size || occluder.max_size > 61) {
    throw ConfigError("augment.occluder.min_size/max_size: need 21 <= min_size <= max_size <= 61");
  }
}

Triplet paste_occluder(const Triplet& t, const Image& donor_frame, OccluderPlacement& p) {
  validate_triplet(t);
  const std::size_t k = p.size;
  const std::size_t h = t.i0.height, w = t.i0.width;
  if (k == 0 || p.src_y + k > donor_frame.height || p.src_x + k > donor_frame.width) {
    throw ShapeError("occluder: source window exceeds donor frame");
  }
  if (p.y0 + k > h || p.x0 + k > w || p.y1 + k > h || p.x1 + k > w) {
    throw ShapeError("occluder: paste position exceeds frame bounds");
  }
  p.yt = midpoint_round_half_up(p.y0, p.y1);
  p.xt = midpoint_round_half_up(p.x0, p.x1);

  Triplet out = t;
  auto paste = [&](Image& dst, std::size_t y, std::size_t x) {
    for (std::size_t r = 0; r < k; ++r) {
      std::copy_n(donor_frame.pixels.begin() + ((p.src_y + r) * donor_frame.width + p.src_x) * 3, k * 3,
                  dst.pixels.begin() + ((y + r) * w + x) * 3);
    }
  };
  paste(out.i0, p.y0, p.x0);
  paste(out.it, p.yt, p.xt);
  paste(out.i1, p.y1, p.x1);
  return out;
}

OccluderOutcome apply_occluder(const Triplet& t, const Triplet& donor, Rng& rng, const OccluderConfig& cfg) {
  if (!donor.source_id.empty() && donor.source_id == t.source_id) {
    throw ConfigError("occluder: donor must be a different sample than '" + t.source_id + "'");
  }
  validate_triplet(t);
  const std::size_t h = t.i0.height, w = t.i0.width;
  if (h < cfg.max_size || w < cfg.max_size || donor.i0.height < cfg.max_size || donor.i0.width < cfg.max_size) {
    log_warning("occluder: frames of '" + t.source_id + "' are smaller than the maximum patch size " +
                std::to_string(cfg.max_size) + "; skipped");
    return {t, std::nullopt};
  }
  OccluderPlacement p;
  p.size = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(cfg.min_size),
                                                    static_cast<std::int64_t>(cfg.max_size)));
  const auto k = static_cast<std::int64_t>(p.size);
  auto pick = [&](std::size_t extent) {
    return static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(extent) - k));
  };
  p.src_y = pick(donor.i0.height);
  p.src_x = pick(donor.i0.width);
  p.y0 = pick(h);
  p.x0 = pick(w);
  p.y1 = pick(h);
  p.x1 = pick(w);
  Triplet out = paste_occluder(t, donor.i0, p);
  return {std::move(out), p};
}

namespace {

Image flip_image(const Image& src, bool horizontal) {
  Image out(src.height, src.width);
  for (std::size_t y = 0; y < src.height; ++y) {
    for (std::size_t x = 0; x < src.width; ++x) {
      const std::size_t sy = horizontal ? y : src.height - 1 - y;
      const std::size_t sx = horizontal ? src.width - 1 - x : x;
      for (std::size_t c = 0; c < 3; ++c) out.at(y, x, c) = src.at(sy, sx, c);
    }
  }
  return out;
}

struct Jitter {
  float gain[3];
  float bias[3];
  float saturation;
};

void apply_jitter(Image& img, const Jitter& j) {
  const std::size_t n = img.height * img.width;
  for (std::size_t p = 0; p < n; ++p) {
    float* px = img.pixels.data() + p * 3;
    for (int c = 0; c < 3; ++c) px[c] = j.gain[c] * px[c] + j.bias[c];
    const float luma = 0.299f * px[0] + 0.587f * px[1] + 0.114f * px[2];
    for (int c = 0; c < 3; ++c) px[c] = luma + (1.0f + j.saturation) * (px[c] - luma);
  }
}

}  // namespace

Triplet flip_horizontal(const Triplet& t) {
  return {flip_image(t.i0, true), flip_image(t.it, true), flip_image(t.i1, true), t.source_id};
}

Triplet flip_vertical(const Triplet& t) {
  return {flip_image(t.i0, false), flip_image(t.it, false), flip_image(t.i1, false), t.source_id};
}

Triplet augment(const Triplet& t, const AugmentConfig& cfg, const Triplet* donor, Rng& rng, bool occluder_active) {
  cfg.validate();
  validate_triplet(t);
  Triplet out = t;

  if (cfg.crop_h != 0) {
    const std::size_t h = t.i0.height, w = t.i0.width;
    if (cfg.crop_h > h || cfg.crop_w > w) {
      throw ConfigError("augment: crop " + std::to_string(cfg.crop_h) + "x" + std::to_string(cfg.crop_w) +
                        " is larger than frame " + std::to_string(h) + "x" + std::to_string(w));
    }
    if (cfg.crop_h != h || cfg.crop_w != w) {
      const auto y = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(h - cfg.crop_h)));
      const auto x = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(w - cfg.crop_w)));
      out.i0 = crop(out.i0, y, x, cfg.crop_h, cfg.crop_w);
      out.it = crop(out.it, y, x, cfg.crop_h, cfg.crop_w);
      out.i1 = crop(out.i1, y, x, cfg.crop_h, cfg.crop_w);
    }
  }
  if (rng.bernoulli(cfg.flip_h)) out = flip_horizontal(out);
  if (rng.bernoulli(cfg.flip_v)) out = flip_vertical(out);

  if (cfg.occluder.enabled && occluder_active && donor != nullptr && rng.bernoulli(cfg.occluder.probability)) {
    out = apply_occluder(out, *donor, rng, cfg.occluder).triplet;
  }

  if (cfg.brightness > 0.0 || cfg.contrast > 0.0 || cfg.saturation > 0.0) {
    Jitter j{};
    for (int c = 0; c < 3; ++c) {
      j.gain[c] = static_cast<float>(1.0 + rng.uniform(-cfg.contrast, cfg.contrast));
      j.bias[c] = static_cast<float>(rng.uniform(-cfg.brightness, cfg.brightness));
    }
    j.saturation = static_cast<float>(rng.uniform(-cfg.saturation, cfg.saturation));
    apply_jitter(out.i0, j);
    apply_jitter(out.it, j);
    apply_jitter(out.i1, j);
  }
  clamp_unit(out.i0);
  clamp_unit(out.it);
  clamp_unit(out.i1);
  return out;
}

}  // namespace tain

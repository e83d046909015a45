#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "tain/dataset.hpp"
#include "tain/rng.hpp"

namespace tain {

/// Square donor patch pasted into all three frames, moving linearly.
struct OccluderConfig {
  bool enabled = false;
  std::size_t min_size = 21;
  std::size_t max_size = 61;
  double probability = 1.0;
  // Occluders are active for the first `pretrain_steps` training steps and
  // off afterwards (pre-train, then fine-tune); 0 keeps them on throughout.
  std::size_t pretrain_steps = 0;

  friend bool operator==(const OccluderConfig&, const OccluderConfig&) = default;
};

struct AugmentConfig {
  double flip_h = 0.5;  // probabilities
  double flip_v = 0.5;
  std::size_t crop_h = 0;  // 0 keeps the full frame
  std::size_t crop_w = 0;
  double brightness = 0.05;  // per-channel additive bias amplitude
  double contrast = 0.05;    // per-channel gain amplitude around 1
  double saturation = 0.05;  // blend amplitude toward/away from luma
  OccluderConfig occluder;
  std::uint64_t seed = 0;

  /// Every transform off; augment() returns its input unchanged.
  static AugmentConfig identity();
  void validate() const;

  friend bool operator==(const AugmentConfig&, const AugmentConfig&) = default;
};

struct OccluderPlacement {
  std::size_t size = 0;          // side k
  std::size_t src_y = 0, src_x = 0;  // top-left in donor.i0
  std::size_t y0 = 0, x0 = 0;    // in i0
  std::size_t y1 = 0, x1 = 0;    // in i1
  std::size_t yt = 0, xt = 0;    // in it: rounded midpoint

  friend bool operator==(const OccluderPlacement&, const OccluderPlacement&) = default;
};

/// round((a + b) / 2) with halves rounded up.
constexpr std::size_t midpoint_round_half_up(std::size_t a, std::size_t b) { return (a + b + 1) / 2; }

/// Pastes donor_frame[src .. src+k) at p0 in i0, p1 in i1 and the midpoint in
/// it. The midpoint fields of `placement` are recomputed from p0 and p1.
Triplet paste_occluder(const Triplet& t, const Image& donor_frame, OccluderPlacement& placement);

struct OccluderOutcome {
  Triplet triplet;
  std::optional<OccluderPlacement> placement;  // empty when skipped
};

/// Draws k uniformly in [min_size, max_size], a uniform source window in
/// donor.i0 and uniform valid positions p0, p1. Frames smaller than max_size
/// skip the occluder with a warning.
OccluderOutcome apply_occluder(const Triplet& t, const Triplet& donor, Rng& rng,
                               const OccluderConfig& cfg = {});

Triplet flip_horizontal(const Triplet& t);
Triplet flip_vertical(const Triplet& t);

/// Crop, flips, occluder (needs `donor`), then color jitter, with one draw of
/// each parameter shared by all three frames; the result is clamped to [0, 1].
Triplet augment(const Triplet& t, const AugmentConfig& cfg, const Triplet* donor, Rng& rng,
                bool occluder_active = true);

}  // namespace tain

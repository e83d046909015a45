#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tain/tensor.hpp"

namespace tain {

/// Interleaved RGB image, row-major, channel values nominally in [0, 1].
struct Image {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> pixels;  // height * width * 3

  Image() = default;
  Image(std::size_t h, std::size_t w, float fill = 0.0f) : height(h), width(w), pixels(h * w * 3, fill) {}

  static constexpr std::size_t kChannels = 3;

  float& at(std::size_t y, std::size_t x, std::size_t c) { return pixels[(y * width + x) * 3 + c]; }
  float at(std::size_t y, std::size_t x, std::size_t c) const { return pixels[(y * width + x) * 3 + c]; }

  bool same_size(const Image& other) const { return height == other.height && width == other.width; }

  template <typename T>
  Tensor<T> to_tensor() const {
    return Tensor<T>(Shape{height, width, 3}, std::vector<T>(pixels.begin(), pixels.end()));
  }

  /// Accepts any [h, w, 3] tensor; values are copied unclamped.
  template <typename T>
  static Image from_tensor(const Tensor<T>& t);

  friend bool operator==(const Image&, const Image&) = default;
};

/// Clamp every value to [0, 1].
void clamp_unit(Image& image);

/// 8-bit quantization with round-half-up after clamping to [0, 1].
std::uint8_t quantize_u8(float value);

/// Reflect-pads (mirror without edge repeat) to `height` x `width`.
Image reflect_pad(const Image& image, std::size_t height, std::size_t width);
Image crop(const Image& image, std::size_t y0, std::size_t x0, std::size_t height, std::size_t width);

}  // namespace tain

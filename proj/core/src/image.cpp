#include "tain/image.hpp"

#include <algorithm>
#include <cmath>

namespace tain {

template <typename T>
Image Image::from_tensor(const Tensor<T>& t) {
  if (t.rank() != 3 || t.dim(2) != 3) {
    throw ShapeError("image: expected a [h,w,3] tensor, got " + shape_str(t.shape()));
  }
  Image img(t.dim(0), t.dim(1));
  auto src = t.data();
  for (std::size_t i = 0; i < src.size(); ++i) img.pixels[i] = static_cast<float>(src[i]);
  return img;
}

template Image Image::from_tensor(const Tensor<float>&);
template Image Image::from_tensor(const Tensor<double>&);

void clamp_unit(Image& image) {
  for (auto& v : image.pixels) v = std::clamp(v, 0.0f, 1.0f);
}

std::uint8_t quantize_u8(float value) {
  const float v = std::clamp(value, 0.0f, 1.0f);
  return static_cast<std::uint8_t>(std::min(255.0f, std::floor(v * 255.0f + 0.5f)));
}

namespace {

std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) {
  if (n == 1) return 0;
  const auto period = static_cast<std::ptrdiff_t>(2 * (n - 1));
  i %= period;
  if (i < 0) i += period;
  if (i >= static_cast<std::ptrdiff_t>(n)) i = period - i;
  return static_cast<std::size_t>(i);
}

}  // namespace

Image reflect_pad(const Image& image, std::size_t height, std::size_t width) {
  if (height < image.height || width < image.width) {
    throw ShapeError("reflect_pad: target is smaller than the image");
  }
  Image out(height, width);
  for (std::size_t y = 0; y < height; ++y) {
    const std::size_t sy = reflect_index(static_cast<std::ptrdiff_t>(y), image.height);
    for (std::size_t x = 0; x < width; ++x) {
      const std::size_t sx = reflect_index(static_cast<std::ptrdiff_t>(x), image.width);
      for (std::size_t c = 0; c < 3; ++c) out.at(y, x, c) = image.at(sy, sx, c);
    }
  }
  return out;
}

Image crop(const Image& image, std::size_t y0, std::size_t x0, std::size_t height, std::size_t width) {
  if (y0 + height > image.height || x0 + width > image.width) {
    throw ShapeError("crop: window exceeds image bounds");
  }
  Image out(height, width);
  for (std::size_t y = 0; y < height; ++y) {
    std::copy_n(image.pixels.begin() + ((y0 + y) * image.width + x0) * 3, width * 3,
                out.pixels.begin() + y * width * 3);
  }
  return out;
}

}  // namespace tain

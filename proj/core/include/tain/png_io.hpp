#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>

#include "tain/image.hpp"

namespace tain {

/// Reads an 8-bit RGB PNG (other PNG formats are converted) scaled by 1/255.
Image load_png(const std::filesystem::path& path);

/// Writes an 8-bit RGB PNG using round-half-up quantization.
void save_png(const std::filesystem::path& path, const Image& image);

struct PngInfo {
  std::size_t height = 0;
  std::size_t width = 0;
};

/// Header-only probe; empty when the file is not a readable PNG.
std::optional<PngInfo> probe_png(const std::filesystem::path& path);

}  // namespace tain

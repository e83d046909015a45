#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tain/dataset.hpp"
#include "tain/image.hpp"

namespace tain {

/// Mean squared error over all pixels and channels.
double mse(const Image& pred, const Image& target);
/// Peak 1.0; 100 dB when mse < 1e-10.
double psnr(const Image& pred, const Image& target);
/// Mean local SSIM (11x11 Gaussian window, sigma 1.5, valid region), averaged
/// over channels.
double ssim(const Image& pred, const Image& target);
/// RMS error in 8-bit units.
double interpolation_error(const Image& pred, const Image& target);

inline constexpr double kPsnrCap = 100.0;

struct TimingStats {
  double mean_ms = 0.0;
  double std_ms = 0.0;  // sample standard deviation
  std::size_t n = 0;
  std::vector<double> samples_ms;
};

struct ItemMetrics {
  std::string id;
  double psnr = 0.0;
  double ssim = 0.0;
  double ie = 0.0;
};

struct MetricsReport {
  std::vector<ItemMetrics> items;  // dataset order
  double psnr = 0.0;               // arithmetic means over items
  double ssim = 0.0;
  double ie = 0.0;
  std::optional<TimingStats> timing;

  /// Pretty-printed JSON with a fixed key order.
  std::string to_json() const;
};

/// Computes per-item metrics for `predict(triplet)` against triplet.it using
/// up to `threads` workers (0 picks the hardware concurrency).
using Predictor = std::function<Image(const Triplet&)>;
MetricsReport evaluate(const Predictor& predict, const TripletDataset& dataset, std::size_t threads = 1);

/// Recomputes the aggregate fields from `items`.
void aggregate(MetricsReport& report);

}  // namespace tain

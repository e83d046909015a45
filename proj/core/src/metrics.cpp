#include "tain/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "tain/error.hpp"
#include "tain/tensor.hpp"

namespace tain {

namespace {

void check_same(const Image& a, const Image& b, const char* what) {
  if (!a.same_size(b) || a.pixels.size() != b.pixels.size()) {
    throw ShapeError(std::string(what) + ": image sizes differ (" + std::to_string(a.height) + "x" +
                     std::to_string(a.width) + " vs " + std::to_string(b.height) + "x" + std::to_string(b.width) + ")");
  }
  if (a.pixels.empty()) throw ShapeError(std::string(what) + ": empty image");
}

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;

std::array<double, kWindow> gaussian_window() {
  std::array<double, kWindow> g{};
  double total = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double x = i - kWindow / 2;
    g[i] = std::exp(-x * x / (2.0 * kSigma * kSigma));
    total += g[i];
  }
  for (auto& v : g) v /= total;
  return g;
}

// Separable valid-mode filtering of one plane.
std::vector<double> filter_valid(const std::vector<double>& plane, std::size_t h, std::size_t w,
                                 const std::array<double, kWindow>& g) {
  const std::size_t oh = h - kWindow + 1, ow = w - kWindow + 1;
  std::vector<double> rows(h * ow);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += g[k] * plane[y * w + x + k];
      rows[y * ow + x] = acc;
    }
  }
  std::vector<double> out(oh * ow);
  for (std::size_t y = 0; y < oh; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += g[k] * rows[(y + k) * ow + x];
      out[y * ow + x] = acc;
    }
  }
  return out;
}

}  // namespace

double mse(const Image& pred, const Image& target) {
  check_same(pred, target, "mse");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.pixels.size(); ++i) {
    const double d = static_cast<double>(pred.pixels[i]) - static_cast<double>(target.pixels[i]);
    acc += d * d;
  }
  return acc / static_cast<double>(pred.pixels.size());
}

double psnr(const Image& pred, const Image& target) {
  const double m = mse(pred, target);
  if (m < 1e-10) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / m));
}

double interpolation_error(const Image& pred, const Image& target) { return 255.0 * std::sqrt(mse(pred, target)); }

double ssim(const Image& pred, const Image& target) {
  check_same(pred, target, "ssim");
  const std::size_t h = pred.height, w = pred.width;
  if (h < kWindow || w < kWindow) {
    throw ShapeError("ssim: images must be at least 11x11, got " + std::to_string(h) + "x" + std::to_string(w));
  }
  constexpr double c1 = 0.01 * 0.01;
  constexpr double c2 = 0.03 * 0.03;
  const auto g = gaussian_window();
  const std::size_t n = h * w;
  double total = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    std::vector<double> a(n), b(n), aa(n), bb(n), ab(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = pred.pixels[i * 3 + c];
      b[i] = target.pixels[i * 3 + c];
      aa[i] = a[i] * a[i];
      bb[i] = b[i] * b[i];
      ab[i] = a[i] * b[i];
    }
    const auto ma = filter_valid(a, h, w, g), mb = filter_valid(b, h, w, g);
    const auto saa = filter_valid(aa, h, w, g), sbb = filter_valid(bb, h, w, g), sab = filter_valid(ab, h, w, g);
    double acc = 0.0;
    for (std::size_t i = 0; i < ma.size(); ++i) {
      const double va = saa[i] - ma[i] * ma[i];
      const double vb = sbb[i] - mb[i] * mb[i];
      const double cov = sab[i] - ma[i] * mb[i];
      acc += ((2.0 * ma[i] * mb[i] + c1) * (2.0 * cov + c2)) /
             ((ma[i] * ma[i] + mb[i] * mb[i] + c1) * (va + vb + c2));
    }
    total += acc / static_cast<double>(ma.size());
  }
  return total / 3.0;
}

void aggregate(MetricsReport& report) {
  report.psnr = report.ssim = report.ie = 0.0;
  if (report.items.empty()) return;
  for (const auto& item : report.items) {
    report.psnr += item.psnr;
    report.ssim += item.ssim;
    report.ie += item.ie;
  }
  const double n = static_cast<double>(report.items.size());
  report.psnr /= n;
  report.ssim /= n;
  report.ie /= n;
}

std::string MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["count"] = items.size();
  j["aggregate"] = {{"psnr", psnr}, {"ssim", ssim}, {"ie", ie}};
  auto rows = nlohmann::ordered_json::array();
  for (const auto& item : items) {
    rows.push_back({{"id", item.id}, {"psnr", item.psnr}, {"ssim", item.ssim}, {"ie", item.ie}});
  }
  j["items"] = std::move(rows);
  if (timing) {
    j["timing"] = {{"mean_ms", timing->mean_ms}, {"std_ms", timing->std_ms}, {"n", timing->n}};
  }
  return j.dump(2) + "\n";
}

MetricsReport evaluate(const Predictor& predict, const TripletDataset& dataset, std::size_t threads) {
  if (dataset.empty()) throw IoError("evaluate: empty dataset");
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, dataset.size());

  MetricsReport report;
  report.items.resize(dataset.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    NoGradGuard no_grad;
    for (std::size_t i = next++; i < dataset.size(); i = next++) {
      try {
        const Triplet t = dataset.get(i);
        Image pred = predict(t);
        clamp_unit(pred);
        report.items[i] = {dataset.id(i), psnr(pred, t.it), ssim(pred, t.it), interpolation_error(pred, t.it)};
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = dataset.size();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  aggregate(report);
  return report;
}

}  // namespace tain

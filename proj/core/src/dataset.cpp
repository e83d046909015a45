#include "tain/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tain/error.hpp"
#include "tain/log.hpp"
#include "tain/png_io.hpp"
#include "tain/rng.hpp"

namespace tain {

namespace fs = std::filesystem;

void validate_triplet(const Triplet& t) {
  if (!t.i0.same_size(t.it) || !t.i0.same_size(t.i1)) {
    throw ShapeError("triplet '" + t.source_id + "': frame sizes differ (" + std::to_string(t.i0.height) + "x" +
                     std::to_string(t.i0.width) + ", " + std::to_string(t.it.height) + "x" +
                     std::to_string(t.it.width) + ", " + std::to_string(t.i1.height) + "x" +
                     std::to_string(t.i1.width) + ")");
  }
}

TripletDataset TripletDataset::from_triplets(std::vector<Triplet> triplets) {
  TripletDataset ds;
  for (auto& t : triplets) {
    validate_triplet(t);
    Item item;
    item.id = t.source_id;
    item.loaded = std::move(t);
    ds.items_.push_back(std::move(item));
  }
  return ds;
}

Triplet TripletDataset::get(std::size_t index) const {
  const Item& item = items_.at(index);
  if (item.loaded) return *item.loaded;
  Triplet t{load_png(item.files[0]), load_png(item.files[1]), load_png(item.files[2]), item.id};
  validate_triplet(t);
  return t;
}

TripletDataset load_triplet_dir(const fs::path& root) {
  if (!fs::is_directory(root)) throw IoError("dataset: '" + root.string() + "' is not a directory");

  struct Candidate {
    fs::path dir;
    std::array<fs::path, 3> files;
  };
  std::vector<Candidate> candidates;

  const fs::path sequences = root / "sequences";
  if (fs::is_directory(sequences)) {
    for (const auto& outer : fs::directory_iterator(sequences)) {
      if (!outer.is_directory()) continue;
      for (const auto& inner : fs::directory_iterator(outer.path())) {
        const fs::path d = inner.path();
        if (inner.is_directory() && fs::exists(d / "im1.png")) {
          candidates.push_back({d, {d / "im1.png", d / "im2.png", d / "im3.png"}});
        }
      }
    }
  }
  for (const auto& entry : fs::directory_iterator(root)) {
    const fs::path d = entry.path();
    if (entry.is_directory() && fs::exists(d / "frame0.png")) {
      candidates.push_back({d, {d / "frame0.png", d / "frame1.png", d / "frame2.png"}});
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) { return a.dir.generic_string() < b.dir.generic_string(); });

  TripletDataset ds;
  for (const auto& c : candidates) {
    const std::string id = fs::relative(c.dir, root).generic_string();
    std::array<std::optional<PngInfo>, 3> info;
    bool readable = true;
    for (std::size_t k = 0; k < 3; ++k) {
      info[k] = probe_png(c.files[k]);
      if (!info[k]) {
        readable = false;
        std::string msg = "dataset: skipping '" + id + "': cannot read " + c.files[k].filename().string();
        log_warning(msg);
        ds.issues_.push_back(std::move(msg));
        ++ds.skipped_;
        break;
      }
    }
    if (!readable) continue;
    if (info[0]->height != info[1]->height || info[0]->width != info[1]->width ||
        info[0]->height != info[2]->height || info[0]->width != info[2]->width) {
      std::string msg = "dataset: rejecting '" + id + "': frame sizes differ";
      log_warning(msg);
      ds.issues_.push_back(std::move(msg));
      ++ds.rejected_;
      continue;
    }
    ds.items_.push_back({id, c.files, std::nullopt});
  }
  if (ds.items_.empty()) throw IoError("dataset: no valid triplets under '" + root.string() + "'");
  return ds;
}

namespace {

struct Disc {
  double cy, cx, vy, vx, radius;
  double color[3];
};

}  // namespace

std::vector<Triplet> make_moving_pattern_triplets(std::size_t count, std::size_t height, std::size_t width,
                                                  std::uint64_t seed) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  std::vector<Triplet> out;
  for (std::size_t n = 0; n < count; ++n) {
    Rng rng = Rng::derive(seed, {0x5e9u, n});
    const double fy = rng.uniform(1.0, 2.0) / static_cast<double>(height);
    const double fx = rng.uniform(1.0, 2.0) / static_cast<double>(width);
    const double bvy = rng.uniform(-2.0, 2.0), bvx = rng.uniform(-2.0, 2.0);
    double phase[3], level[3];
    for (int c = 0; c < 3; ++c) {
      phase[c] = rng.uniform(0.0, kTwoPi);
      level[c] = rng.uniform(0.35, 0.65);
    }
    std::vector<Disc> discs(2 + static_cast<std::size_t>(rng.uniform_int(0, 1)));
    for (auto& disc : discs) {
      disc.radius = rng.uniform(5.0, 10.0);
      disc.cy = rng.uniform(disc.radius, static_cast<double>(height) - disc.radius);
      disc.cx = rng.uniform(disc.radius, static_cast<double>(width) - disc.radius);
      disc.vy = rng.uniform(-4.0, 4.0);
      disc.vx = rng.uniform(-4.0, 4.0);
      for (auto& c : disc.color) c = rng.uniform(0.1, 0.9);
    }

    auto render = [&](double tau) {
      Image img(height, width);
      for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) {
          double px[3];
          const double u = fy * (static_cast<double>(y) - bvy * tau) + fx * (static_cast<double>(x) - bvx * tau);
          for (int c = 0; c < 3; ++c) px[c] = level[c] + 0.2 * std::sin(kTwoPi * u + phase[c]);
          for (const auto& disc : discs) {
            const double dy = static_cast<double>(y) - (disc.cy + disc.vy * tau);
            const double dx = static_cast<double>(x) - (disc.cx + disc.vx * tau);
            const double a = std::clamp(disc.radius - std::sqrt(dy * dy + dx * dx) + 0.5, 0.0, 1.0);
            for (int c = 0; c < 3; ++c) px[c] = (1.0 - a) * px[c] + a * disc.color[c];
          }
          for (std::size_t c = 0; c < 3; ++c) img.at(y, x, c) = static_cast<float>(std::clamp(px[c], 0.0, 1.0));
        }
      }
      return img;
    };
    out.push_back({render(-1.0), render(0.0), render(1.0), "synthetic/" + std::to_string(n)});
  }
  return out;
}

void write_triplet_dir(const fs::path& root, const std::vector<Triplet>& triplets) {
  for (std::size_t n = 0; n < triplets.size(); ++n) {
    char name[32];
    std::snprintf(name, sizeof(name), "%05zu", n);
    const fs::path dir = root / name;
    fs::create_directories(dir);
    save_png(dir / "frame0.png", triplets[n].i0);
    save_png(dir / "frame1.png", triplets[n].it);
    save_png(dir / "frame2.png", triplets[n].i1);
  }
}

}  // namespace tain

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tain/image.hpp"

namespace tain {

/// Two input frames and the ground-truth midpoint frame, values in [0, 1].
struct Triplet {
  Image i0;
  Image it;
  Image i1;
  std::string source_id;
};

/// Throws ShapeError when the three frames differ in size.
void validate_triplet(const Triplet& t);

/// Deterministically ordered collection of triplets, either held in memory or
/// decoded from disk on access.
class TripletDataset {
 public:
  static TripletDataset from_triplets(std::vector<Triplet> triplets);

  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  Triplet get(std::size_t index) const;
  const std::string& id(std::size_t index) const { return items_.at(index).id; }

  /// Items dropped while scanning because a frame could not be read.
  std::size_t skipped() const { return skipped_; }
  /// Items dropped because their frames disagree in size.
  std::size_t rejected() const { return rejected_; }
  /// One message per dropped item.
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  friend TripletDataset load_triplet_dir(const std::filesystem::path& root);

  struct Item {
    std::string id;
    std::array<std::filesystem::path, 3> files;  // i0, it, i1
    std::optional<Triplet> loaded;
  };

  std::vector<Item> items_;
  std::size_t skipped_ = 0;
  std::size_t rejected_ = 0;
  std::vector<std::string> issues_;
};

/// Scans `root` for Vimeo90K-style `sequences/<a>/<b>/im{1,2,3}.png` and flat
/// `<name>/frame{0,1,2}.png` triplets, ordered lexicographically by path.
/// Unreadable or inconsistent items are dropped with a warning; an empty
/// result throws IoError.
TripletDataset load_triplet_dir(const std::filesystem::path& root);

/// Smooth drifting background with soft-edged discs in linear motion; the
/// middle frame is rendered exactly at the temporal midpoint.
std::vector<Triplet> make_moving_pattern_triplets(std::size_t count, std::size_t height,
                                                  std::size_t width, std::uint64_t seed);

/// Writes `triplets` under `root` in the flat layout.
void write_triplet_dir(const std::filesystem::path& root, const std::vector<Triplet>& triplets);

}  // namespace tain

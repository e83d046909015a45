#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tain/augment.hpp"
#include "tain/model.hpp"
#include "tain/train.hpp"

namespace tain {

struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  AugmentConfig augment;

  /// Toy model with 64x64 crops.
  static RunConfig toy();
  void validate() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Flat `key = value` lines grouped under [model], [train] and [augment]
/// headers; `#` starts a comment. A [run] section is accepted and ignored so
/// manifests parse back. Keys may also be written fully qualified
/// (`model.d = 32`) outside any section. Unknown keys throw ConfigError
/// naming the key.
RunConfig parse_config(std::string_view text, RunConfig base = {});
RunConfig load_config_file(const std::filesystem::path& path, RunConfig base = {});

/// Applies one `section.key=value` override.
void apply_override(RunConfig& cfg, std::string_view assignment);
void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value);

/// Every known key in canonical order, fully qualified.
std::vector<std::string> config_keys();

/// Canonical text form; parse_config(to_config_text(c)) == c. Entries in
/// `run_info` are written to a trailing [run] section.
std::string to_config_text(const RunConfig& cfg,
                           const std::vector<std::pair<std::string, std::string>>& run_info = {});

}  // namespace tain

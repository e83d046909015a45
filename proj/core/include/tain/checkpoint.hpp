#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tain/adam.hpp"
#include "tain/model.hpp"

namespace tain {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  Shape shape;
  std::vector<float> data;
};

/// In-memory image of a checkpoint file.
struct Checkpoint {
  ModelConfig config;
  std::uint64_t step = 0;  // training steps completed
  std::vector<NamedTensor> tensors;  // model parameters in registration order
  std::optional<AdamState<float>> adam;
};

Checkpoint make_checkpoint(const TainModel<float>& model, std::uint64_t step,
                           const AdamState<float>* adam = nullptr);

/// Binary little-endian layout: "TAIN", u32 version, model config, u64 step,
/// tensor table (u32 count; per tensor u32 name length, name bytes, u32 rank,
/// u64 dims, f32 data), u8 optimizer flag, then the Adam step and skip
/// counters and the first and second moment tables.
std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes);

/// Writes atomically via a temporary file in the same directory.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Copies the tensor table into `model`; names and shapes must match exactly.
void restore_parameters(TainModel<float>& model, const Checkpoint& ckpt);
/// Builds a model from the stored config and restores its parameters.
TainModel<float> model_from_checkpoint(const Checkpoint& ckpt);

}  // namespace tain

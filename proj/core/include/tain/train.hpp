#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "tain/adam.hpp"
#include "tain/augment.hpp"
#include "tain/dataset.hpp"
#include "tain/model.hpp"

namespace tain {

struct TrainConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double gamma = 0.1;  // gradient-loss weight
  std::size_t batch_size = 4;
  std::size_t max_steps = 1000;
  std::size_t checkpoint_every = 0;  // 0 writes only the final checkpoint
  std::uint64_t seed = 0;

  AdamConfig adam() const { return {lr, beta1, beta2, eps}; }
  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Everything needed to continue a run: completed steps and optimizer state.
struct TrainState {
  std::uint64_t step = 0;
  AdamState<float> adam;
};

struct TrainResult {
  std::vector<double> losses;  // one per executed step, batch mean before the update
  std::uint64_t skipped_updates = 0;
};

/// Indices of the batch trained at `step`. Sampling walks a fresh seeded
/// permutation of the dataset per epoch, so any step's batch is a pure
/// function of (seed, step, dataset size).
std::vector<std::size_t> batch_indices(std::uint64_t seed, std::uint64_t step, std::size_t batch_size,
                                       std::size_t dataset_size);

/// Trains from state.step until cfg.max_steps. With a non-empty `out_dir`
/// appends `step,loss` rows to loss.csv and writes ckpt_<step>.tain and
/// latest.tain. A non-finite loss writes nonfinite_step<k>.txt listing the
/// batch ids and throws NumericError.
TrainResult train(TainModel<float>& model, const TripletDataset& dataset, const TrainConfig& cfg,
                  const AugmentConfig& augment_cfg, TrainState& state,
                  const std::filesystem::path& out_dir = {},
                  const std::function<void(std::uint64_t step, double loss)>& on_step = {});

}  // namespace tain

#include "tain/train.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "tain/checkpoint.hpp"
#include "tain/error.hpp"
#include "tain/log.hpp"
#include "tain/loss.hpp"
#include "tain/ops.hpp"
#include "tain/rng.hpp"

namespace tain {

namespace fs = std::filesystem;

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("train.lr: must be positive");
  if (!(gamma >= 0.0)) throw ConfigError("train.gamma: must be non-negative");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("train.beta1: must be in [0,1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("train.beta2: must be in [0,1)");
  if (!(eps > 0.0)) throw ConfigError("train.eps: must be positive");
  if (batch_size == 0) throw ConfigError("train.batch_size: must be positive");
}

namespace {

std::vector<std::size_t> epoch_permutation(std::uint64_t seed, std::uint64_t epoch, std::size_t n) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng = Rng::derive(seed, {1, epoch});
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::vector<std::size_t> batch_indices(std::uint64_t seed, std::uint64_t step, std::size_t batch_size,
                                       std::size_t dataset_size) {
  if (dataset_size == 0) throw ConfigError("train: empty dataset");
  std::vector<std::size_t> out;
  std::uint64_t cached_epoch = ~std::uint64_t{0};
  std::vector<std::size_t> perm;
  for (std::size_t b = 0; b < batch_size; ++b) {
    const std::uint64_t g = step * batch_size + b;
    const std::uint64_t epoch = g / dataset_size;
    if (epoch != cached_epoch) {
      perm = epoch_permutation(seed, epoch, dataset_size);
      cached_epoch = epoch;
    }
    out.push_back(perm[g % dataset_size]);
  }
  return out;
}

TrainResult train(TainModel<float>& model, const TripletDataset& dataset, const TrainConfig& cfg,
                  const AugmentConfig& augment_cfg, TrainState& state, const fs::path& out_dir,
                  const std::function<void(std::uint64_t, double)>& on_step) {
  cfg.validate();
  augment_cfg.validate();
  if (dataset.empty()) throw ConfigError("train: empty dataset");
  if (state.step > cfg.max_steps) {
    throw ConfigError("train: resume step " + std::to_string(state.step) + " is past max_steps " +
                      std::to_string(cfg.max_steps));
  }

  std::ofstream csv;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    const fs::path csv_path = out_dir / "loss.csv";
    const bool fresh = state.step == 0 || !fs::exists(csv_path);
    csv.open(csv_path, fresh ? std::ios::trunc : std::ios::app);
    if (!csv) throw IoError("train: cannot write '" + csv_path.string() + "'");
    if (fresh) csv << "step,loss\n";
  }
  auto write_checkpoint = [&](std::uint64_t step) {
    if (out_dir.empty()) return;
    const Checkpoint ckpt = make_checkpoint(model, step, &state.adam);
    save_checkpoint(out_dir / ("ckpt_" + std::to_string(step) + ".tain"), ckpt);
    save_checkpoint(out_dir / "latest.tain", ckpt);
  };

  const AdamConfig adam_cfg = cfg.adam();
  const float gamma = static_cast<float>(cfg.gamma);
  const float inv_batch = 1.0f / static_cast<float>(cfg.batch_size);
  const std::size_t n = dataset.size();
  auto& params = model.parameters();
  TrainResult result;

  while (state.step < cfg.max_steps) {
    const std::uint64_t step = state.step;
    const auto indices = batch_indices(cfg.seed, step, cfg.batch_size, n);
    const bool occluder_active =
        augment_cfg.occluder.pretrain_steps == 0 || step < augment_cfg.occluder.pretrain_steps;

    params.zero_grad();
    double batch_loss = 0.0;
    bool finite = true;
    for (std::size_t b = 0; b < indices.size(); ++b) {
      Rng rng = Rng::derive(augment_cfg.seed, {2, step, b});
      const Triplet t = dataset.get(indices[b]);
      Triplet sample;
      if (augment_cfg.occluder.enabled && occluder_active && n > 1) {
        auto donor_idx = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 2));
        if (donor_idx >= indices[b]) ++donor_idx;
        const Triplet donor = dataset.get(donor_idx);
        sample = augment(t, augment_cfg, &donor, rng, occluder_active);
      } else {
        sample = augment(t, augment_cfg, nullptr, rng, occluder_active);
      }
      Tensor<float> loss;
      double value = 0.0;
      try {
        const auto pred = model.forward(sample.i0.to_tensor<float>(), sample.i1.to_tensor<float>());
        loss = interpolation_loss(pred, sample.it.to_tensor<float>(), gamma);
        value = loss.item();
      } catch (const NumericError&) {
        // NaNs can trip an op's own guard before reaching the loss.
        value = std::numeric_limits<double>::quiet_NaN();
      }
      if (!std::isfinite(value)) {
        finite = false;
        break;
      }
      batch_loss += value;
      ops::scale(loss, inv_batch).backward();
    }

    if (!finite) {
      std::string ids;
      for (auto i : indices) ids += (ids.empty() ? "" : ", ") + dataset.id(i);
      const std::string msg = "train: non-finite loss at step " + std::to_string(step) + " (batch: " + ids + ")";
      if (!out_dir.empty()) {
        std::ofstream dump(out_dir / ("nonfinite_step" + std::to_string(step) + ".txt"));
        dump << "step=" << step << "\n";
        for (auto i : indices) dump << "item=" << i << " id=" << dataset.id(i) << "\n";
      }
      throw NumericError(msg);
    }

    batch_loss /= static_cast<double>(indices.size());
    if (!adam_step(params, state.adam, adam_cfg)) {
      log_warning("train: skipped update at step " + std::to_string(step) + " (non-finite gradient)");
      ++result.skipped_updates;
    }
    ++state.step;
    result.losses.push_back(batch_loss);
    if (csv.is_open()) csv << step << ',' << format_double(batch_loss) << '\n';
    if (on_step) on_step(step, batch_loss);
    if (cfg.checkpoint_every != 0 && state.step % cfg.checkpoint_every == 0 && state.step != cfg.max_steps) {
      csv.flush();
      write_checkpoint(state.step);
    }
  }
  if (csv.is_open()) csv.flush();
  write_checkpoint(state.step);
  return result;
}

}  // namespace tain

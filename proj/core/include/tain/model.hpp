#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "tain/cs.hpp"
#include "tain/ia.hpp"
#include "tain/image.hpp"
#include "tain/nn.hpp"
#include "tain/tensor.hpp"

namespace tain {

struct ModelConfig {
  std::size_t s = 8;             // shuffle scale
  std::size_t d = 192;           // trunk feature width
  std::size_t n_resgroups = 5;
  std::size_t n_resblocks = 2;   // per group
  std::size_t ca_reduction = 0;  // 0 selects 16 for d >= 64, else 4
  bool enable_cs = true;
  bool enable_ia = true;
  bool normalize_qk = true;
  // Subtract each frame's per-channel mean before encoding and add the
  // average of the two means back onto the decoded frame.
  bool mean_shift = true;
  std::uint64_t seed = 0;

  /// s=2, d=16, two ResGroups; the configuration used by tests.
  static ModelConfig toy();

  std::size_t reduction() const;
  /// Throws ConfigError naming the offending field.
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

template <typename T>
struct StageTrace {
  Tensor<T> features;  // ResGroup output, before any CS fusion
  std::optional<SimilarityResult<T>> cs0;
  std::optional<SimilarityResult<T>> cs1;
  std::optional<IAWeights<T>> ia;
};

template <typename T>
struct ForwardTrace {
  Tensor<T> output;
  std::vector<StageTrace<T>> stages;  // one per ResGroup
  Tensor<T> mean_image;               // added back at decode; undefined without mean shift
};

/// Shuffle-based interpolation network: encode, n ResGroups with cross
/// similarity and image attention after every group but the last, decode.
template <typename T>
class TainModel {
 public:
  explicit TainModel(const ModelConfig& config);
  TainModel(const TainModel&) = delete;
  TainModel& operator=(const TainModel&) = delete;
  TainModel(TainModel&&) noexcept = default;
  TainModel& operator=(TainModel&&) noexcept = default;

  const ModelConfig& config() const { return config_; }
  ParameterSet<T>& parameters() { return params_; }
  const ParameterSet<T>& parameters() const { return params_; }

  /// Midpoint frame for [h,w,3] inputs with s | h and s | w.
  Tensor<T> forward(const Tensor<T>& i0, const Tensor<T>& i1) const;
  ForwardTrace<T> forward_trace(const Tensor<T>& i0, const Tensor<T>& i1) const;
  /// The trunk after every ResGroup decoded through the shared tail; the last
  /// entry equals forward().
  std::vector<Tensor<T>> intermediate_predictions(const Tensor<T>& i0, const Tensor<T>& i1) const;

  /// Reflect-pads to multiples of s, runs forward without recording a graph,
  /// and crops back to the input size.
  Image infer_padded(const Image& i0, const Image& i1) const;

  static std::size_t expected_parameter_count(const ModelConfig& config);

  const HeadTail<T>& head_tail() const { return head_tail_; }
  const std::vector<ResGroup<T>>& resgroups() const { return resgroups_; }
  const std::vector<CSParams<T>>& cs_params() const { return cs_; }  // 2 per insertion
  const std::vector<IAParams<T>>& ia_params() const { return ia_; }
  const std::vector<Conv2d<T>>& fusion_convs() const { return fusion_; }

 private:
  ForwardTrace<T> run(const Tensor<T>& i0, const Tensor<T>& i1, bool keep_trace) const;
  Tensor<T> decode(const Tensor<T>& features, const Tensor<T>& mean_image) const;

  ModelConfig config_;
  ParameterSet<T> params_;
  HeadTail<T> head_tail_;
  Conv2d<T> encoder_;
  std::vector<ResGroup<T>> resgroups_;
  std::vector<CSParams<T>> cs_;
  std::vector<IAParams<T>> ia_;
  std::vector<Conv2d<T>> fusion_;
};

extern template class TainModel<float>;
extern template class TainModel<double>;

}  // namespace tain

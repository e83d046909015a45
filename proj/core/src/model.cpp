#include "tain/model.hpp"

#include <algorithm>
#include <string>

#include "tain/ops.hpp"

namespace tain {

ModelConfig ModelConfig::toy() {
  ModelConfig c;
  c.s = 2;
  c.d = 16;
  c.n_resgroups = 2;
  c.n_resblocks = 2;
  return c;
}

std::size_t ModelConfig::reduction() const {
  if (ca_reduction != 0) return ca_reduction;
  return d >= 64 ? 16 : 4;
}

void ModelConfig::validate() const {
  if (s == 0) throw ConfigError("model.s: shuffle scale must be positive");
  if (d == 0) throw ConfigError("model.d: feature width must be positive");
  if (n_resgroups < 2) throw ConfigError("model.n_resgroups: at least 2 ResGroups are required");
  if (n_resblocks == 0) throw ConfigError("model.n_resblocks: at least one ResBlock per group");
  if (enable_ia && !enable_cs) throw ConfigError("model.enable_ia: image attention requires enable_cs");
  const std::size_t r = reduction();
  if (r == 0 || d % r != 0) {
    throw ConfigError("model.ca_reduction: " + std::to_string(r) + " does not divide d=" + std::to_string(d));
  }
}

namespace {

std::size_t conv_params(std::size_t k, std::size_t cin, std::size_t cout) {
  return k * k * cin * cout + cout;
}

/// Per-channel mean of a [h,w,3] frame broadcast back to [h,w,3].
template <typename T>
Tensor<T> channel_mean_image(const Tensor<T>& t) {
  const std::size_t hw = t.dim(0) * t.dim(1);
  const Tensor<T> ones(Shape{hw, 1}, T(1));
  const auto m = ops::reshape(ops::global_avg_pool(t), Shape{1, 3});
  return ops::reshape(ops::matmul(ones, m), t.shape());
}

template <typename T>
struct ShiftedInputs {
  Tensor<T> i0, i1;
  Tensor<T> mean_image;  // undefined when mean shifting is off
};

template <typename T>
ShiftedInputs<T> shift_inputs(const Tensor<T>& i0, const Tensor<T>& i1, bool enabled) {
  if (!enabled) return {i0, i1, Tensor<T>{}};
  const auto m0 = channel_mean_image(i0);
  const auto m1 = channel_mean_image(i1);
  return {ops::sub(i0, m0), ops::sub(i1, m1), ops::scale(ops::add(m0, m1), T(0.5))};
}

}  // namespace

template <typename T>
TainModel<T>::TainModel(const ModelConfig& config) : config_(config) {
  config_.validate();
  const auto s = config_.s, d = config_.d;
  const auto seed = config_.seed;
  head_tail_ = HeadTail<T>::create(params_, s, d, seed);
  for (std::size_t r = 0; r < config_.n_resgroups; ++r) {
    resgroups_.push_back(ResGroup<T>::create(params_, "rg" + std::to_string(r), d, config_.n_resblocks,
                                             config_.reduction(), seed));
  }
  if (!config_.enable_cs) return;

  encoder_ = Conv2d<T>::create(params_, "encoder", 3, 3 * s * s, d, true, seed);
  for (std::size_t r = 0; r + 1 < config_.n_resgroups; ++r) {
    const std::string tag = std::to_string(r);
    cs_.push_back(CSParams<T>::create(params_, "cs" + tag + ".f0", d, config_.normalize_qk, seed));
    cs_.push_back(CSParams<T>::create(params_, "cs" + tag + ".f1", d, config_.normalize_qk, seed));
    if (config_.enable_ia) ia_.push_back(IAParams<T>::create(params_, "ia" + tag, d, d, seed));

    // Pass-through init: the Y block of the center tap is the identity and
    // every other weight is zero, so the fused output equals Y.
    auto fuse = Conv2d<T>::create(params_, "fuse" + tag, 3, 3 * d, d, true, seed);
    auto w = fuse.weight.mutable_data();
    std::fill(w.begin(), w.end(), T(0));
    for (std::size_t c = 0; c < d; ++c) w[((1 * 3 + 1) * 3 * d + c) * d + c] = T(1);
    auto b = fuse.bias.mutable_data();
    std::fill(b.begin(), b.end(), T(0));
    fusion_.push_back(std::move(fuse));
  }
}

template <typename T>
std::size_t TainModel<T>::expected_parameter_count(const ModelConfig& c) {
  c.validate();
  const std::size_t s2 = c.s * c.s, d = c.d;
  std::size_t n = conv_params(3, 6 * s2, d) + conv_params(3, d, 3 * s2);
  const std::size_t group = c.n_resblocks * 2 * conv_params(3, d, d) + 2 * d * (d / c.reduction());
  n += c.n_resgroups * group;
  if (c.enable_cs) {
    n += conv_params(3, 3 * s2, d);
    std::size_t insertion = 2 * (2 * d * d + 1) + conv_params(3, 3 * d, d);
    if (c.enable_ia) insertion += 2 * (d + 1) * d + d * 2;
    n += (c.n_resgroups - 1) * insertion;
  }
  return n;
}

template <typename T>
Tensor<T> TainModel<T>::decode(const Tensor<T>& features, const Tensor<T>& mean_image) const {
  auto out = ops::pixel_shuffle(head_tail_.tail(features), config_.s);
  if (mean_image.defined()) out = ops::add(out, mean_image);
  return out;
}

template <typename T>
ForwardTrace<T> TainModel<T>::run(const Tensor<T>& i0, const Tensor<T>& i1, bool keep_trace) const {
  if (i0.rank() != 3 || i0.dim(2) != 3 || i0.shape() != i1.shape()) {
    throw ShapeError("forward: frames must be equal [h,w,3] tensors, got " + shape_str(i0.shape()) +
                     " and " + shape_str(i1.shape()));
  }
  const std::size_t h = i0.dim(0), w = i0.dim(1), s = config_.s;
  if (h % s != 0 || w % s != 0) {
    throw ShapeError("forward: frame size " + std::to_string(h) + "x" + std::to_string(w) +
                     " is not divisible by s=" + std::to_string(s) +
                     "; use infer_padded for reflective padding");
  }

  auto [in0, in1, mean_image] = shift_inputs(i0, i1, config_.mean_shift);

  ForwardTrace<T> trace;
  Tensor<T> y, x0, x1;
  if (config_.enable_cs) {
    auto enc = encode_inputs(in0, in1, s, head_tail_.head, encoder_);
    y = enc.concat_feat;
    x0 = enc.x0;
    x1 = enc.x1;
  } else {
    y = head_tail_.head(ops::concat<T>({ops::pixel_unshuffle(in0, s), ops::pixel_unshuffle(in1, s)}, 2));
  }

  const std::size_t n = resgroups_.size();
  for (std::size_t r = 0; r < n; ++r) {
    y = resgroups_[r](y);
    StageTrace<T> stage;
    if (keep_trace) stage.features = y;
    if (r + 1 < n && config_.enable_cs) {
      auto [c0, c1] = cs_pair(y, x0, x1, cs_[2 * r], cs_[2 * r + 1]);
      Tensor<T> f0 = c0.s, f1 = c1.s;
      if (config_.enable_ia) {
        auto ia = ia_forward(c0.s, c1.s, c0.d_max, c1.d_max, ia_[r]);
        f0 = ia.s0w;
        f1 = ia.s1w;
        if (keep_trace) stage.ia = ia.weights;
      }
      if (keep_trace) {
        stage.cs0 = std::move(c0);
        stage.cs1 = std::move(c1);
      }
      y = fusion_[r](ops::concat<T>({y, f0, f1}, 2));
    }
    if (keep_trace) trace.stages.push_back(std::move(stage));
  }
  trace.output = decode(y, mean_image);
  trace.mean_image = mean_image;
  return trace;
}

template <typename T>
Tensor<T> TainModel<T>::forward(const Tensor<T>& i0, const Tensor<T>& i1) const {
  return run(i0, i1, false).output;
}

template <typename T>
ForwardTrace<T> TainModel<T>::forward_trace(const Tensor<T>& i0, const Tensor<T>& i1) const {
  return run(i0, i1, true);
}

template <typename T>
std::vector<Tensor<T>> TainModel<T>::intermediate_predictions(const Tensor<T>& i0, const Tensor<T>& i1) const {
  auto trace = forward_trace(i0, i1);
  std::vector<Tensor<T>> out;
  for (std::size_t r = 0; r + 1 < trace.stages.size(); ++r) {
    out.push_back(decode(trace.stages[r].features, trace.mean_image));
  }
  out.push_back(trace.output);
  return out;
}

template <typename T>
Image TainModel<T>::infer_padded(const Image& i0, const Image& i1) const {
  if (!i0.same_size(i1)) {
    throw ShapeError("infer_padded: frame sizes " + std::to_string(i0.height) + "x" + std::to_string(i0.width) +
                     " and " + std::to_string(i1.height) + "x" + std::to_string(i1.width) + " differ");
  }
  const std::size_t s = config_.s;
  const std::size_t hp = (i0.height + s - 1) / s * s, wp = (i0.width + s - 1) / s * s;
  NoGradGuard no_grad;
  if (hp == i0.height && wp == i0.width) {
    return Image::from_tensor(forward(i0.to_tensor<T>(), i1.to_tensor<T>()));
  }
  auto out = forward(reflect_pad(i0, hp, wp).template to_tensor<T>(), reflect_pad(i1, hp, wp).template to_tensor<T>());
  return crop(Image::from_tensor(out), 0, 0, i0.height, i0.width);
}

template class TainModel<float>;
template class TainModel<double>;

}  // namespace tain

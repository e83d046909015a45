#include "tain/nn.hpp"

#include <cmath>

#include "tain/ops.hpp"
#include "tain/rng.hpp"

namespace tain {

template <typename T>
Tensor<T> ParameterSet<T>::create(const std::string& name, Shape shape) {
  if (find(name)) throw ConfigError("parameter '" + name + "' registered twice");
  Tensor<T> t(std::move(shape));
  t.set_requires_grad(true);
  entries_.push_back({name, t});
  return t;
}

template <typename T>
const Tensor<T>* ParameterSet<T>::find(const std::string& name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return &e.tensor;
  }
  return nullptr;
}

template <typename T>
std::size_t ParameterSet<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.tensor.numel();
  return n;
}

template <typename T>
void ParameterSet<T>::zero_grad() {
  for (auto& e : entries_) e.tensor.zero_grad();
}

template <typename T>
void init_uniform(Tensor<T>& t, double bound, std::uint64_t seed, const std::string& name) {
  Rng rng = Rng::derive(seed, {stable_hash(name)});
  for (auto& v : t.mutable_data()) v = static_cast<T>(rng.uniform(-bound, bound));
}

template <typename T>
Conv2d<T> Conv2d<T>::create(ParameterSet<T>& params, const std::string& name, std::size_t k,
                            std::size_t cin, std::size_t cout, bool with_bias, std::uint64_t seed) {
  Conv2d conv;
  conv.weight = params.create(name + ".weight", {k, k, cin, cout});
  const double bound = 1.0 / std::sqrt(static_cast<double>(k * k * cin));
  init_uniform(conv.weight, bound, seed, name + ".weight");
  if (with_bias) {
    conv.bias = params.create(name + ".bias", {cout});
    init_uniform(conv.bias, bound, seed, name + ".bias");
  }
  conv.padding = k / 2;
  return conv;
}

template <typename T>
Tensor<T> Conv2d<T>::operator()(const Tensor<T>& x) const {
  return ops::conv2d(x, weight, bias, padding);
}

template <typename T>
ChannelAttention<T> ChannelAttention<T>::create(ParameterSet<T>& params, const std::string& name,
                                                std::size_t channels, std::size_t reduction,
                                                std::uint64_t seed) {
  if (reduction == 0 || channels % reduction != 0) {
    throw ConfigError("channel attention: reduction " + std::to_string(reduction) +
                      " does not divide channel count " + std::to_string(channels));
  }
  ChannelAttention ca;
  ca.reduction = reduction;
  const std::size_t mid = channels / reduction;
  ca.w_down = params.create(name + ".w_down", {1, 1, channels, mid});
  ca.w_up = params.create(name + ".w_up", {1, 1, mid, channels});
  init_uniform(ca.w_down, 1.0 / std::sqrt(static_cast<double>(channels)), seed, name + ".w_down");
  init_uniform(ca.w_up, 1.0 / std::sqrt(static_cast<double>(mid)), seed, name + ".w_up");
  return ca;
}

template <typename T>
Tensor<T> ChannelAttention<T>::gate(const Tensor<T>& x) const {
  auto pooled = ops::global_avg_pool(x);
  auto hidden = ops::relu(ops::conv2d(pooled, w_down, Tensor<T>{}, 0));
  return ops::sigmoid(ops::conv2d(hidden, w_up, Tensor<T>{}, 0));
}

template <typename T>
Tensor<T> ChannelAttention<T>::operator()(const Tensor<T>& x) const {
  return ops::scale_channels(x, gate(x));
}

template <typename T>
Tensor<T> ResBlock<T>::operator()(const Tensor<T>& x) const {
  return ops::add(x, conv2(ops::relu(conv1(x))));
}

template <typename T>
ResGroup<T> ResGroup<T>::create(ParameterSet<T>& params, const std::string& name,
                                std::size_t channels, std::size_t n_blocks, std::size_t reduction,
                                std::uint64_t seed) {
  ResGroup group;
  for (std::size_t b = 0; b < n_blocks; ++b) {
    const std::string prefix = name + ".block" + std::to_string(b);
    group.blocks.push_back({Conv2d<T>::create(params, prefix + ".conv1", 3, channels, channels, true, seed),
                            Conv2d<T>::create(params, prefix + ".conv2", 3, channels, channels, true, seed)});
  }
  group.ca = ChannelAttention<T>::create(params, name + ".ca", channels, reduction, seed);
  return group;
}

template <typename T>
Tensor<T> ResGroup<T>::operator()(const Tensor<T>& x) const {
  Tensor<T> y = x;
  for (const auto& block : blocks) y = block(y);
  return ca(y);
}

template <typename T>
HeadTail<T> HeadTail<T>::create(ParameterSet<T>& params, std::size_t s, std::size_t d, std::uint64_t seed) {
  return {Conv2d<T>::create(params, "head", 3, 2 * 3 * s * s, d, true, seed),
          Conv2d<T>::create(params, "tail", 3, d, 3 * s * s, true, seed)};
}

template <typename T>
EncodedInputs<T> encode_inputs(const Tensor<T>& i0, const Tensor<T>& i1, std::size_t s,
                               const Conv2d<T>& head, const Conv2d<T>& encoder) {
  if (i0.shape() != i1.shape()) {
    throw ShapeError("encode_inputs: frame shapes " + shape_str(i0.shape()) + " and " +
                     shape_str(i1.shape()) + " differ");
  }
  auto u0 = ops::pixel_unshuffle(i0, s);
  auto u1 = ops::pixel_unshuffle(i1, s);
  return {head(ops::concat<T>({u0, u1}, 2)), encoder(u0), encoder(u1)};
}

#define TAIN_INSTANTIATE_NN(T)                                                              \
  template class ParameterSet<T>;                                                           \
  template void init_uniform(Tensor<T>&, double, std::uint64_t, const std::string&);        \
  template struct Conv2d<T>;                                                                \
  template struct ChannelAttention<T>;                                                      \
  template struct ResBlock<T>;                                                              \
  template struct ResGroup<T>;                                                              \
  template struct HeadTail<T>;                                                              \
  template EncodedInputs<T> encode_inputs(const Tensor<T>&, const Tensor<T>&, std::size_t, \
                                          const Conv2d<T>&, const Conv2d<T>&);

TAIN_INSTANTIATE_NN(float)
TAIN_INSTANTIATE_NN(double)

#undef TAIN_INSTANTIATE_NN

}  // namespace tain

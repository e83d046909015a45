#pragma once

// Shuffle-based building blocks: convolution layers, channel attention,
// residual blocks and groups, and the input encoders.

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tain/tensor.hpp"

namespace tain {

/// Ordered registry of named learnable tensors. Entries share storage with the
/// layer handles that created them.
template <typename T>
class ParameterSet {
 public:
  struct Entry {
    std::string name;
    Tensor<T> tensor;
  };

  /// Registers a zero tensor with requires_grad set.
  Tensor<T> create(const std::string& name, Shape shape);

  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }
  const Tensor<T>* find(const std::string& name) const;
  std::size_t parameter_count() const;
  void zero_grad();

 private:
  std::vector<Entry> entries_;
};

/// Fills `t` with U(-bound, bound) drawn from a stream keyed by (seed, name).
template <typename T>
void init_uniform(Tensor<T>& t, double bound, std::uint64_t seed, const std::string& name);

template <typename T>
struct Conv2d {
  Tensor<T> weight;  // [k,k,cin,cout]
  Tensor<T> bias;    // [cout] or undefined
  std::size_t padding = 0;

  /// Fan-in scaled uniform init, padding k/2 (size preserving).
  static Conv2d create(ParameterSet<T>& params, const std::string& name, std::size_t k,
                       std::size_t cin, std::size_t cout, bool with_bias, std::uint64_t seed);

  Tensor<T> operator()(const Tensor<T>& x) const;
  std::size_t in_channels() const { return weight.dim(2); }
  std::size_t out_channels() const { return weight.dim(3); }
};

/// Squeeze-excitation style gating: x * sigmoid(w_up * relu(w_down * gap(x))).
template <typename T>
struct ChannelAttention {
  Tensor<T> w_down;  // [1,1,c,c/r]
  Tensor<T> w_up;    // [1,1,c/r,c]
  std::size_t reduction = 1;

  /// Throws ConfigError unless `reduction` divides `channels`.
  static ChannelAttention create(ParameterSet<T>& params, const std::string& name,
                                 std::size_t channels, std::size_t reduction, std::uint64_t seed);

  /// Per-channel weights in (0,1), shape [1,1,c].
  Tensor<T> gate(const Tensor<T>& x) const;
  Tensor<T> operator()(const Tensor<T>& x) const;
};

/// conv3x3 - relu - conv3x3 plus identity skip.
template <typename T>
struct ResBlock {
  Conv2d<T> conv1;
  Conv2d<T> conv2;

  Tensor<T> operator()(const Tensor<T>& x) const;
};

/// Residual blocks followed by channel attention. There is no skip around the
/// group itself: the output is a fresh refinement of the input.
template <typename T>
struct ResGroup {
  std::vector<ResBlock<T>> blocks;
  ChannelAttention<T> ca;

  static ResGroup create(ParameterSet<T>& params, const std::string& name, std::size_t channels,
                         std::size_t n_blocks, std::size_t reduction, std::uint64_t seed);

  Tensor<T> operator()(const Tensor<T>& x) const;
};

/// Head maps the concatenated down-shuffled frames (2*3*s^2 channels) to the
/// trunk width d; tail maps d back to 3*s^2 for up-shuffling.
template <typename T>
struct HeadTail {
  Conv2d<T> head;
  Conv2d<T> tail;

  static HeadTail create(ParameterSet<T>& params, std::size_t s, std::size_t d, std::uint64_t seed);
};

template <typename T>
struct EncodedInputs {
  Tensor<T> concat_feat;  // [h/s, w/s, d]
  Tensor<T> x0;           // [h/s, w/s, d]
  Tensor<T> x1;           // [h/s, w/s, d]
};

/// Down-shuffles both frames; the trunk input comes from the head conv on the
/// channel concatenation, and the per-frame features X0/X1 from one shared
/// encoder conv applied to each frame separately.
template <typename T>
EncodedInputs<T> encode_inputs(const Tensor<T>& i0, const Tensor<T>& i1, std::size_t s,
                               const Conv2d<T>& head, const Conv2d<T>& encoder);

}  // namespace tain

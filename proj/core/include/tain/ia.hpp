#pragma once

// Image Attention: per-pixel two-way softmax over the two CS feature maps.
// S' = concat(S0, S1, D0max, D1max) has 2(d+1) channels; two 1x1 convs with
// a ReLU between them give one logit per frame, and a softmax across the two
// logits yields weights A0 + A1 = 1 at every pixel.

#include <cstddef>
#include <cstdint>
#include <string>

#include "tain/nn.hpp"
#include "tain/tensor.hpp"

namespace tain {

template <typename T>
struct IAParams {
  Tensor<T> w1;  // [1,1,2(d+1),c_mid]
  Tensor<T> w2;  // [1,1,c_mid,2]
  std::size_t d = 0;
  std::size_t c_mid = 0;

  static IAParams create(ParameterSet<T>& params, const std::string& name, std::size_t d,
                         std::size_t c_mid, std::uint64_t seed);
};

template <typename T>
struct IAWeights {
  Tensor<T> a0;  // [h',w',1]
  Tensor<T> a1;  // [h',w',1]
};

template <typename T>
struct IAOutput {
  Tensor<T> s0w;  // a0 * s0
  Tensor<T> s1w;  // a1 * s1
  IAWeights<T> weights;
};

template <typename T>
IAOutput<T> ia_forward(const Tensor<T>& s0, const Tensor<T>& s1, const Tensor<T>& d0max,
                       const Tensor<T>& d1max, const IAParams<T>& params);

}  // namespace tain

#include "tain/ia.hpp"

#include <cmath>

#include "tain/ops.hpp"

namespace tain {

template <typename T>
IAParams<T> IAParams<T>::create(ParameterSet<T>& params, const std::string& name, std::size_t d,
                                std::size_t c_mid, std::uint64_t seed) {
  IAParams p;
  p.d = d;
  p.c_mid = c_mid;
  const std::size_t cin = 2 * (d + 1);
  p.w1 = params.create(name + ".w1", {1, 1, cin, c_mid});
  p.w2 = params.create(name + ".w2", {1, 1, c_mid, 2});
  init_uniform(p.w1, 1.0 / std::sqrt(static_cast<double>(cin)), seed, name + ".w1");
  init_uniform(p.w2, 1.0 / std::sqrt(static_cast<double>(c_mid)), seed, name + ".w2");
  return p;
}

template <typename T>
IAOutput<T> ia_forward(const Tensor<T>& s0, const Tensor<T>& s1, const Tensor<T>& d0max,
                       const Tensor<T>& d1max, const IAParams<T>& params) {
  if (s0.rank() != 3 || s0.shape() != s1.shape()) {
    throw ShapeError("ia_forward: CS features " + shape_str(s0.shape()) + " and " +
                     shape_str(s1.shape()) + " must be equal [h,w,d] tensors");
  }
  const Shape map_shape{s0.dim(0), s0.dim(1), 1};
  if (d0max.shape() != map_shape || d1max.shape() != map_shape) {
    throw ShapeError("ia_forward: maximum-similarity maps must be " + shape_str(map_shape));
  }
  const std::size_t expected = 2 * (params.d + 1);
  const std::size_t got = 2 * s0.dim(2) + 2;
  if (got != expected) {
    throw ShapeError("ia_forward: concatenated input has " + std::to_string(got) +
                     " channels, expected 2(d+1)=" + std::to_string(expected));
  }
  auto stacked = ops::concat<T>({s0, s1, d0max, d1max}, 2);
  auto hidden = ops::relu(ops::conv2d(stacked, params.w1, Tensor<T>{}, 0));
  auto logits = ops::conv2d(hidden, params.w2, Tensor<T>{}, 0);
  auto a = ops::softmax(logits, 2);
  IAOutput<T> out;
  out.weights.a0 = ops::slice(a, 2, 0, 1);
  out.weights.a1 = ops::slice(a, 2, 1, 2);
  out.s0w = ops::scale_pixels(s0, out.weights.a0);
  out.s1w = ops::scale_pixels(s1, out.weights.a1);
  return out;
}

template struct IAParams<float>;
template struct IAParams<double>;
template IAOutput<float> ia_forward(const Tensor<float>&, const Tensor<float>&, const Tensor<float>&,
                                    const Tensor<float>&, const IAParams<float>&);
template IAOutput<double> ia_forward(const Tensor<double>&, const Tensor<double>&, const Tensor<double>&,
                                     const Tensor<double>&, const IAParams<double>&);

}  // namespace tain

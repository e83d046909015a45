#pragma once

// Differentiable operations on Tensor<T>. Images and feature maps are
// channels-last [h, w, c]. Binary elementwise ops accept operands of
// identical shape, or one operand holding a single value; nothing else is
// broadcast, so per-channel and per-pixel scaling have dedicated ops.

#include <cstddef>
#include <vector>

#include "tain/tensor.hpp"

namespace tain::ops {

template <typename T> Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> scale(const Tensor<T>& a, T factor);

template <typename T> Tensor<T> relu(const Tensor<T>& a);
template <typename T> Tensor<T> sigmoid(const Tensor<T>& a);
template <typename T> Tensor<T> abs(const Tensor<T>& a);

/// Reductions to a rank-0 tensor.
template <typename T> Tensor<T> sum(const Tensor<T>& a);
template <typename T> Tensor<T> mean(const Tensor<T>& a);

/// [m,k] x [k,n] -> [m,n]
template <typename T> Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> transpose(const Tensor<T>& a);
template <typename T> Tensor<T> reshape(const Tensor<T>& a, Shape shape);

/// Unit Euclidean norm along `axis`; slices with norm below 1e-12 map to zero.
template <typename T> Tensor<T> l2_normalize(const Tensor<T>& a, std::size_t axis);
/// Max-subtracted softmax along `axis`. Throws NumericError on non-finite input.
template <typename T> Tensor<T> softmax(const Tensor<T>& a, std::size_t axis);

template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& parts, std::size_t axis);
/// Half-open range [begin, end) along `axis`.
template <typename T>
Tensor<T> slice(const Tensor<T>& a, std::size_t axis, std::size_t begin, std::size_t end);

/// [h,w,c] -> [1,1,c]
template <typename T> Tensor<T> global_avg_pool(const Tensor<T>& a);
/// x[h,w,c] * gate[c] (gate may have any shape with c elements).
template <typename T> Tensor<T> scale_channels(const Tensor<T>& x, const Tensor<T>& gate);
/// x[h,w,c] * weight[h,w,1]
template <typename T> Tensor<T> scale_pixels(const Tensor<T>& x, const Tensor<T>& weight);

/// input[h,w,cin], weight[k,k,cin,cout], bias[cout] or undefined.
/// Output is [h+2p-k+1, w+2p-k+1, cout]; zero padding.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias,
                 std::size_t padding);

/// [h,w,c] -> [h/s, w/s, c*s*s]; output channel ci*s*s + dy*s + dx holds
/// input pixel (y*s+dy, x*s+dx) of channel ci.
template <typename T> Tensor<T> pixel_unshuffle(const Tensor<T>& a, std::size_t s);
/// Exact inverse of pixel_unshuffle: [h,w,c] -> [h*s, w*s, c/(s*s)].
template <typename T> Tensor<T> pixel_shuffle(const Tensor<T>& a, std::size_t s);

/// a[i+1] - a[i] along `axis`; that axis shrinks by one.
template <typename T> Tensor<T> forward_diff(const Tensor<T>& a, std::size_t axis);

template <typename T>
struct RowMax {
  Tensor<T> values;                  // [n]
  std::vector<std::size_t> indices;  // first maximal column per row
};

/// Per-row maximum of a [n,m] matrix. The index is a constant in the reverse
/// sweep; the gradient reaches only the selected entry.
template <typename T> RowMax<T> row_max(const Tensor<T>& a);

/// Rows of a [n,d] matrix picked by `rows`, -> [rows.size(), d].
template <typename T>
Tensor<T> gather_rows(const Tensor<T>& a, const std::vector<std::size_t>& rows);

}  // namespace tain::ops

#pragma once

// Cross Similarity: cross-attention from the current prediction features Y
// (queries) to one input frame's features X (keys and values).
//
//   Q = Y Wqk^T,  K = X Wqk^T,  V = X Wv^T        (one shared Wqk)
//   D[i,:] = softmax_j(<Q_i, K_j> / sqrt(d))       (rows of Q, K optionally unit-normalized)
//   S_i = Y_i + alpha * V[argmax_j D[i,j]]
//
// The argmax is a constant during the reverse sweep; gradients reach Y, alpha
// and the selected V rows, and through the row maximum of D also Wqk.

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tain/nn.hpp"
#include "tain/tensor.hpp"

namespace tain {

/// Largest h'*w' accepted; the full score matrix is (h'w')^2.
inline constexpr std::size_t kMaxAttentionPositions = 16384;

template <typename T>
struct CSParams {
  Tensor<T> w_qk;   // [d,d], used for both queries and keys
  Tensor<T> w_v;    // [d,d]
  Tensor<T> alpha;  // rank 0, starts at exactly 0
  std::size_t d = 0;
  bool normalize_qk = true;

  static CSParams create(ParameterSet<T>& params, const std::string& name, std::size_t d,
                         bool normalize_qk, std::uint64_t seed);
};

template <typename T>
struct SimilarityResult {
  Tensor<T> s;                          // [h',w',d]
  Tensor<T> d_max;                      // [h',w',1], row maxima of D
  std::vector<std::size_t> argmax_idx;  // flattened key position per query
  Tensor<T> similarity;                 // D, [h'w', h'w']
  std::size_t grid_h = 0;
  std::size_t grid_w = 0;
};

template <typename T>
SimilarityResult<T> cs_forward(const Tensor<T>& y, const Tensor<T>& x, const CSParams<T>& params);

/// cs_forward against each input frame, ordered (frame 0, frame 1).
template <typename T>
std::pair<SimilarityResult<T>, SimilarityResult<T>> cs_pair(const Tensor<T>& y, const Tensor<T>& x0,
                                                            const Tensor<T>& x1, const CSParams<T>& p0,
                                                            const CSParams<T>& p1);

}  // namespace tain

#include "tain/cs.hpp"

#include <cmath>

#include "tain/ops.hpp"

namespace tain {

template <typename T>
CSParams<T> CSParams<T>::create(ParameterSet<T>& params, const std::string& name, std::size_t d,
                                bool normalize_qk, std::uint64_t seed) {
  CSParams p;
  p.d = d;
  p.normalize_qk = normalize_qk;
  p.w_qk = params.create(name + ".w_qk", {d, d});
  p.w_v = params.create(name + ".w_v", {d, d});
  p.alpha = params.create(name + ".alpha", {});
  const double bound = 1.0 / std::sqrt(static_cast<double>(d));
  init_uniform(p.w_qk, bound, seed, name + ".w_qk");
  init_uniform(p.w_v, bound, seed, name + ".w_v");
  return p;
}

template <typename T>
SimilarityResult<T> cs_forward(const Tensor<T>& y, const Tensor<T>& x, const CSParams<T>& params) {
  if (y.rank() != 3 || x.rank() != 3) {
    throw ShapeError("cs_forward: expected [h,w,d] features, got " + shape_str(y.shape()) + " and " +
                     shape_str(x.shape()));
  }
  if (y.shape() != x.shape()) {
    throw ShapeError("cs_forward: query features " + shape_str(y.shape()) +
                     " and input features " + shape_str(x.shape()) + " differ");
  }
  const std::size_t h = y.dim(0), w = y.dim(1), d = y.dim(2);
  if (d != params.d) {
    throw ShapeError("cs_forward: feature width (dim 2) is " + std::to_string(d) +
                     " but parameters expect d=" + std::to_string(params.d));
  }
  const std::size_t n = h * w;
  if (n > kMaxAttentionPositions) {
    throw ShapeError("cs_forward: " + std::to_string(n) + " positions exceed the limit of " +
                     std::to_string(kMaxAttentionPositions) + " for global attention");
  }

  auto y2 = ops::reshape(y, {n, d});
  auto x2 = ops::reshape(x, {n, d});
  auto w_qk_t = ops::transpose(params.w_qk);
  auto q = ops::matmul(y2, w_qk_t);
  auto k = ops::matmul(x2, w_qk_t);
  auto v = ops::matmul(x2, ops::transpose(params.w_v));
  if (params.normalize_qk) {
    q = ops::l2_normalize(q, 1);
    k = ops::l2_normalize(k, 1);
  }
  // Scaling Q (n x d) rather than the n x n scores keeps the largest buffer out of one op.
  q = ops::scale(q, static_cast<T>(1.0 / std::sqrt(static_cast<double>(d))));
  auto scores = ops::matmul(q, ops::transpose(k));
  auto sim = ops::softmax(scores, 1);
  auto best = ops::row_max(sim);
  auto retrieved = ops::gather_rows(v, best.indices);
  auto s = ops::add(y2, ops::mul(retrieved, params.alpha));

  SimilarityResult<T> result;
  result.s = ops::reshape(s, {h, w, d});
  result.d_max = ops::reshape(best.values, {h, w, 1});
  result.argmax_idx = std::move(best.indices);
  result.similarity = sim;
  result.grid_h = h;
  result.grid_w = w;
  return result;
}

template <typename T>
std::pair<SimilarityResult<T>, SimilarityResult<T>> cs_pair(const Tensor<T>& y, const Tensor<T>& x0,
                                                            const Tensor<T>& x1, const CSParams<T>& p0,
                                                            const CSParams<T>& p1) {
  if (x0.shape() != x1.shape()) {
    throw ShapeError("cs_pair: frame features " + shape_str(x0.shape()) + " and " +
                     shape_str(x1.shape()) + " differ");
  }
  auto r0 = cs_forward(y, x0, p0);
  auto r1 = cs_forward(y, x1, p1);
  return {std::move(r0), std::move(r1)};
}

template struct CSParams<float>;
template struct CSParams<double>;
template SimilarityResult<float> cs_forward(const Tensor<float>&, const Tensor<float>&, const CSParams<float>&);
template SimilarityResult<double> cs_forward(const Tensor<double>&, const Tensor<double>&, const CSParams<double>&);
template std::pair<SimilarityResult<float>, SimilarityResult<float>> cs_pair(
    const Tensor<float>&, const Tensor<float>&, const Tensor<float>&, const CSParams<float>&, const CSParams<float>&);
template std::pair<SimilarityResult<double>, SimilarityResult<double>> cs_pair(
    const Tensor<double>&, const Tensor<double>&, const Tensor<double>&, const CSParams<double>&,
    const CSParams<double>&);

}  // namespace tain

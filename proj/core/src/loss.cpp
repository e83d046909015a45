#include "tain/loss.hpp"

#include "tain/ops.hpp"

namespace tain {

template <typename T>
Tensor<T> interpolation_loss(const Tensor<T>& pred, const Tensor<T>& target, T gamma) {
  if (pred.shape() != target.shape()) {
    throw ShapeError("loss: prediction " + shape_str(pred.shape()) + " and target " + shape_str(target.shape()) +
                     " differ");
  }
  if (pred.rank() != 3) throw ShapeError("loss: expected [h,w,c] images, got " + shape_str(pred.shape()));
  auto l1 = ops::mean(ops::abs(ops::sub(pred, target)));
  if (gamma == T(0)) return l1;
  auto gy = ops::mean(ops::abs(ops::sub(ops::forward_diff(pred, 0), ops::forward_diff(target, 0))));
  auto gx = ops::mean(ops::abs(ops::sub(ops::forward_diff(pred, 1), ops::forward_diff(target, 1))));
  return ops::add(l1, ops::scale(ops::add(gy, gx), gamma));
}

template Tensor<float> interpolation_loss(const Tensor<float>&, const Tensor<float>&, float);
template Tensor<double> interpolation_loss(const Tensor<double>&, const Tensor<double>&, double);

}  // namespace tain

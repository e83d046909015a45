#pragma once

#include "tain/tensor.hpp"

namespace tain {

/// mean|pred - target| + gamma * (mean|dy(pred) - dy(target)| + mean|dx(pred) - dx(target)|)
/// with forward differences along height and width of [h,w,c] images; the
/// edge row/column without a forward neighbour is left out of each mean.
template <typename T>
Tensor<T> interpolation_loss(const Tensor<T>& pred, const Tensor<T>& target, T gamma);

}  // namespace tain

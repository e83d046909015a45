#pragma once

// Dense row-major N-d tensor with tape-free reverse-mode differentiation.
//
// Every differentiable op creates a Node that remembers its inputs and a
// backward closure. Nodes carry a global sequence number; backward() collects
// the nodes reachable from the loss and replays them in strictly decreasing
// sequence order, i.e. exact reverse execution order. Replayed nodes are
// released, so a second sweep over the same graph raises GraphError.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tain/error.hpp"

namespace tain {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

template <typename T>
struct TensorImpl;

template <typename T>
struct Node {
  std::uint64_t seq = 0;
  std::vector<std::shared_ptr<TensorImpl<T>>> inputs;
  std::weak_ptr<TensorImpl<T>> output;
  // Receives the output gradient and accumulates into the inputs.
  std::function<void(std::span<const T>)> backward;
  bool released = false;
};

template <typename T>
struct TensorImpl {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;
  bool requires_grad = false;
  std::shared_ptr<Node<T>> grad_fn;
};

/// Gradient buffer of `impl`, allocated (zeroed) on first use; nullptr when
/// the tensor does not take part in differentiation.
template <typename T>
std::vector<T>* grad_buffer(TensorImpl<T>& impl);

}  // namespace detail

/// Whether newly executed ops are recorded for differentiation on this thread.
bool grad_enabled();

/// Disables graph recording on the current thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T(0));
  Tensor(Shape shape, std::vector<T> values);

  static Tensor scalar(T value);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;

  std::span<const T> data() const;
  /// Mutable access for leaves only (parameters, inputs).
  std::span<T> mutable_data();
  T item() const;
  T at(std::initializer_list<std::size_t> index) const;

  bool requires_grad() const;
  Tensor& set_requires_grad(bool on = true);
  bool is_leaf() const;

  bool has_grad() const;
  std::span<const T> grad() const;
  std::span<T> mutable_grad();
  /// Zeroed gradient buffer for tensors that require grad; drops it otherwise.
  void zero_grad();

  /// Reverse sweep from this scalar. Throws GraphError when the tensor is not
  /// a scalar or its graph was already consumed by an earlier sweep.
  void backward() const;

  /// Copy of the values, cut from any graph.
  Tensor detach() const;

  template <typename U>
  Tensor<U> cast() const {
    std::vector<U> out(numel());
    auto src = data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<U>(src[i]);
    return Tensor<U>(shape(), std::move(out));
  }

  const std::shared_ptr<detail::TensorImpl<T>>& impl() const { return impl_; }

  /// Builds an op result. When grad mode is on and any input requires grad, a
  /// node is recorded with `backward` as its reverse rule.
  static Tensor make_result(Shape shape, std::vector<T> values,
                            std::initializer_list<const Tensor*> inputs,
                            std::function<void(std::span<const T>)> backward);
  static Tensor make_result(Shape shape, std::vector<T> values,
                            const std::vector<const Tensor*>& inputs,
                            std::function<void(std::span<const T>)> backward);

 private:
  explicit Tensor(std::shared_ptr<detail::TensorImpl<T>> impl) : impl_(std::move(impl)) {}
  const detail::TensorImpl<T>& checked() const;

  std::shared_ptr<detail::TensorImpl<T>> impl_;
};

using Tensorf = Tensor<float>;
using Tensord = Tensor<double>;

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace tain

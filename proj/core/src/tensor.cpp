#include "tain/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <sstream>
#include <unordered_set>

namespace tain {

namespace {

std::atomic<std::uint64_t> g_next_seq{1};
thread_local bool t_grad_enabled = true;

}  // namespace

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

bool grad_enabled() { return t_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(t_grad_enabled) { t_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { t_grad_enabled = previous_; }

namespace detail {

template <typename T>
std::vector<T>* grad_buffer(TensorImpl<T>& impl) {
  if (!impl.requires_grad) return nullptr;
  if (impl.grad.size() != impl.data.size()) impl.grad.assign(impl.data.size(), T(0));
  return &impl.grad;
}

template std::vector<float>* grad_buffer(TensorImpl<float>&);
template std::vector<double>* grad_buffer(TensorImpl<double>&);

}  // namespace detail

template <typename T>
Tensor<T>::Tensor(Shape shape, T fill) : impl_(std::make_shared<detail::TensorImpl<T>>()) {
  impl_->data.assign(shape_numel(shape), fill);
  impl_->shape = std::move(shape);
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> values)
    : impl_(std::make_shared<detail::TensorImpl<T>>()) {
  if (shape_numel(shape) != values.size()) {
    throw ShapeError("tensor: shape " + shape_str(shape) + " holds " +
                     std::to_string(shape_numel(shape)) + " values but " +
                     std::to_string(values.size()) + " were given");
  }
  impl_->shape = std::move(shape);
  impl_->data = std::move(values);
}

template <typename T>
Tensor<T> Tensor<T>::scalar(T value) {
  return Tensor(Shape{}, std::vector<T>{value});
}

template <typename T>
const detail::TensorImpl<T>& Tensor<T>::checked() const {
  if (!impl_) throw Error("tensor: use of an undefined tensor");
  return *impl_;
}

template <typename T>
const Shape& Tensor<T>::shape() const {
  return checked().shape;
}

template <typename T>
std::size_t Tensor<T>::dim(std::size_t axis) const {
  const auto& s = shape();
  if (axis >= s.size()) {
    throw ShapeError("tensor: axis " + std::to_string(axis) + " out of range for shape " +
                     shape_str(s));
  }
  return s[axis];
}

template <typename T>
std::size_t Tensor<T>::numel() const {
  return checked().data.size();
}

template <typename T>
std::span<const T> Tensor<T>::data() const {
  return checked().data;
}

template <typename T>
std::span<T> Tensor<T>::mutable_data() {
  checked();
  if (impl_->grad_fn) throw GraphError("tensor: mutable access to a non-leaf tensor");
  return impl_->data;
}

template <typename T>
T Tensor<T>::item() const {
  if (numel() != 1) {
    throw ShapeError("tensor: item() on a tensor of shape " + shape_str(shape()));
  }
  return impl_->data[0];
}

template <typename T>
T Tensor<T>::at(std::initializer_list<std::size_t> index) const {
  const auto& s = shape();
  if (index.size() != s.size()) throw ShapeError("tensor: index rank mismatch for " + shape_str(s));
  std::size_t flat = 0;
  std::size_t axis = 0;
  for (auto i : index) {
    if (i >= s[axis]) throw ShapeError("tensor: index out of range on axis " + std::to_string(axis));
    flat = flat * s[axis] + i;
    ++axis;
  }
  return impl_->data[flat];
}

template <typename T>
bool Tensor<T>::requires_grad() const {
  return checked().requires_grad;
}

template <typename T>
Tensor<T>& Tensor<T>::set_requires_grad(bool on) {
  checked();
  if (impl_->grad_fn && !on) throw GraphError("tensor: cannot clear requires_grad on a non-leaf");
  impl_->requires_grad = on;
  return *this;
}

template <typename T>
bool Tensor<T>::is_leaf() const {
  return checked().grad_fn == nullptr;
}

template <typename T>
bool Tensor<T>::has_grad() const {
  const auto& impl = checked();
  return !impl.grad.empty();
}

template <typename T>
std::span<const T> Tensor<T>::grad() const {
  const auto& impl = checked();
  if (impl.grad.empty()) throw GraphError("tensor: no gradient has been accumulated");
  return impl.grad;
}

template <typename T>
std::span<T> Tensor<T>::mutable_grad() {
  checked();
  if (impl_->grad.size() != impl_->data.size()) impl_->grad.assign(impl_->data.size(), T(0));
  return impl_->grad;
}

template <typename T>
void Tensor<T>::zero_grad() {
  checked();
  if (impl_->requires_grad) {
    impl_->grad.assign(impl_->data.size(), T(0));
  } else {
    impl_->grad.clear();
  }
}

template <typename T>
void Tensor<T>::backward() const {
  const auto& impl = checked();
  if (impl.data.size() != 1) {
    throw GraphError("backward: loss must be a scalar, got shape " + shape_str(impl.shape));
  }
  if (!impl.requires_grad) throw GraphError("backward: loss does not depend on any parameter");
  if (impl.grad_fn && impl.grad_fn->released) {
    throw GraphError("backward: graph already consumed by an earlier sweep; run a new forward pass");
  }

  std::vector<std::shared_ptr<detail::Node<T>>> nodes;
  std::unordered_set<const detail::Node<T>*> seen;
  std::vector<detail::Node<T>*> stack;
  if (impl.grad_fn) {
    stack.push_back(impl.grad_fn.get());
    seen.insert(impl.grad_fn.get());
    nodes.push_back(impl.grad_fn);
  }
  while (!stack.empty()) {
    auto* node = stack.back();
    stack.pop_back();
    for (const auto& in : node->inputs) {
      const auto& fn = in->grad_fn;
      if (!fn || fn->released || !seen.insert(fn.get()).second) continue;
      nodes.push_back(fn);
      stack.push_back(fn.get());
    }
  }
  std::sort(nodes.begin(), nodes.end(), [](const auto& a, const auto& b) { return a->seq > b->seq; });

  (*detail::grad_buffer(*impl_))[0] += T(1);
  for (auto& node : nodes) {
    auto out = node->output.lock();
    if (out && !out->grad.empty()) node->backward(out->grad);
  }
  // Inputs keep intermediate tensors alive, so release only after the sweep.
  for (auto& node : nodes) {
    node->backward = nullptr;
    node->inputs.clear();
    node->released = true;
  }
}

template <typename T>
Tensor<T> Tensor<T>::detach() const {
  return Tensor(shape(), std::vector<T>(data().begin(), data().end()));
}

template <typename T>
Tensor<T> Tensor<T>::make_result(Shape shape, std::vector<T> values,
                                 std::initializer_list<const Tensor*> inputs,
                                 std::function<void(std::span<const T>)> backward) {
  return make_result(std::move(shape), std::move(values), std::vector<const Tensor*>(inputs),
                     std::move(backward));
}

template <typename T>
Tensor<T> Tensor<T>::make_result(Shape shape, std::vector<T> values,
                                 const std::vector<const Tensor*>& inputs,
                                 std::function<void(std::span<const T>)> backward) {
  Tensor out(std::move(shape), std::move(values));
  if (!t_grad_enabled) return out;
  bool needs = false;
  for (const auto* in : inputs) needs = needs || (in->defined() && in->impl_->requires_grad);
  if (!needs) return out;

  auto node = std::make_shared<detail::Node<T>>();
  node->seq = g_next_seq.fetch_add(1, std::memory_order_relaxed);
  for (const auto* in : inputs) {
    if (in->defined() && in->impl_->requires_grad) node->inputs.push_back(in->impl_);
  }
  node->output = out.impl_;
  node->backward = std::move(backward);
  out.impl_->requires_grad = true;
  out.impl_->grad_fn = std::move(node);
  return out;
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace tain

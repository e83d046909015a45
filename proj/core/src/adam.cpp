#include "tain/adam.hpp"

#include <cmath>

namespace tain {

template <typename T>
bool adam_step(ParameterSet<T>& params, AdamState<T>& state, const AdamConfig& cfg) {
  auto& entries = params.entries();
  for (const auto& e : entries) {
    if (!e.tensor.has_grad()) continue;
    for (T g : e.tensor.grad()) {
      if (!std::isfinite(g)) {
        ++state.skipped;
        return false;
      }
    }
  }
  if (state.m.size() != entries.size()) {
    state.m.clear();
    state.v.clear();
    for (const auto& e : entries) {
      state.m.emplace_back(e.tensor.numel(), T(0));
      state.v.emplace_back(e.tensor.numel(), T(0));
    }
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t p = 0; p < entries.size(); ++p) {
    auto& tensor = entries[p].tensor;
    if (!tensor.has_grad()) continue;
    auto grad = tensor.grad();
    auto data = tensor.mutable_data();
    auto& m = state.m[p];
    auto& v = state.v[p];
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double g = static_cast<double>(grad[i]);
      const double mi = cfg.beta1 * static_cast<double>(m[i]) + (1.0 - cfg.beta1) * g;
      const double vi = cfg.beta2 * static_cast<double>(v[i]) + (1.0 - cfg.beta2) * g * g;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      const double update = cfg.lr * (mi / bc1) / (std::sqrt(vi / bc2) + cfg.eps);
      data[i] = static_cast<T>(static_cast<double>(data[i]) - update);
    }
  }
  return true;
}

template bool adam_step(ParameterSet<float>&, AdamState<float>&, const AdamConfig&);
template bool adam_step(ParameterSet<double>&, AdamState<double>&, const AdamConfig&);

}  // namespace tain

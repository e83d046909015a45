#pragma once

#include <cstdint>
#include <vector>

#include "tain/nn.hpp"

namespace tain {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename T>
struct AdamState {
  std::vector<std::vector<T>> m;  // one per parameter, registration order
  std::vector<std::vector<T>> v;
  std::uint64_t step = 0;     // applied updates
  std::uint64_t skipped = 0;  // updates refused for non-finite gradients
};

/// Bias-corrected Adam update from the gradients held by `params`
/// (parameters without a gradient count as zero). Returns false and leaves
/// parameters, moments and the step counter untouched when any gradient is
/// non-finite; the incident is counted in state.skipped.
template <typename T>
bool adam_step(ParameterSet<T>& params, AdamState<T>& state, const AdamConfig& cfg);

}  // namespace tain

#pragma once

#include <cstddef>

#include <Eigen/Core>

namespace tain::detail {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// C[m,n] (+)= op(A) * op(B) on dense row-major buffers, where op(A) is
/// [m,k] (A stored [k,m] when trans_a) and op(B) is [k,n] (B stored [n,k]
/// when trans_b).
template <typename T>
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, const T* a,
          const T* b, T* c, bool accumulate) {
  using Map = Eigen::Map<const RowMatrix<T>>;
  const auto mi = static_cast<Eigen::Index>(m);
  const auto ni = static_cast<Eigen::Index>(n);
  const auto ki = static_cast<Eigen::Index>(k);
  Eigen::Map<RowMatrix<T>> out(c, mi, ni);
  if (!accumulate) out.setZero();
  if (k == 0 || m == 0 || n == 0) return;
  if (!trans_a && !trans_b) {
    out.noalias() += Map(a, mi, ki) * Map(b, ki, ni);
  } else if (!trans_a && trans_b) {
    out.noalias() += Map(a, mi, ki) * Map(b, ni, ki).transpose();
  } else if (trans_a && !trans_b) {
    out.noalias() += Map(a, ki, mi).transpose() * Map(b, ki, ni);
  } else {
    out.noalias() += Map(a, ki, mi).transpose() * Map(b, ni, ki).transpose();
  }
}

}  // namespace tain::detail

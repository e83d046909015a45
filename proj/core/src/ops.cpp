#include "tain/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include <Eigen/Core>

#include "gemm.hpp"

namespace tain::ops {

namespace {

using detail::grad_buffer;

struct AxisSplit {
  std::size_t outer = 1;
  std::size_t len = 1;
  std::size_t inner = 1;
};

AxisSplit split_axis(const Shape& shape, std::size_t axis, const char* op) {
  if (axis >= shape.size()) {
    throw ShapeError(std::string(op) + ": axis " + std::to_string(axis) +
                     " out of range for shape " + shape_str(shape));
  }
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.len = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

template <typename T>
void require_rank(const Tensor<T>& t, std::size_t rank, const char* op, const char* what) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(op) + ": " + what + " must have rank " + std::to_string(rank) +
                     ", got shape " + shape_str(t.shape()));
  }
}

enum class Binary { kAdd, kSub, kMul };

template <typename T>
Tensor<T> binary(const Tensor<T>& a, const Tensor<T>& b, Binary kind, const char* op) {
  const bool same = a.shape() == b.shape();
  const bool b_scalar = !same && b.numel() == 1;
  const bool a_scalar = !same && !b_scalar && a.numel() == 1;
  if (!same && !a_scalar && !b_scalar) {
    throw ShapeError(std::string(op) + ": shapes " + shape_str(a.shape()) + " and " +
                     shape_str(b.shape()) + " differ and neither operand is a scalar");
  }
  Shape out_shape = a_scalar ? b.shape() : a.shape();
  const std::size_t n = shape_numel(out_shape);
  auto av = a.data();
  auto bv = b.data();
  std::vector<T> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const T x = av[a_scalar ? 0 : i];
    const T y = bv[b_scalar ? 0 : i];
    switch (kind) {
      case Binary::kAdd: out[i] = x + y; break;
      case Binary::kSub: out[i] = x - y; break;
      case Binary::kMul: out[i] = x * y; break;
    }
  }
  auto ai = a.impl();
  auto bi = b.impl();
  return Tensor<T>::make_result(
      std::move(out_shape), std::move(out), {&a, &b},
      [ai, bi, kind, a_scalar, b_scalar](std::span<const T> g) {
        const std::size_t n = g.size();
        if (auto* ga = grad_buffer(*ai)) {
          for (std::size_t i = 0; i < n; ++i) {
            T d = g[i];
            if (kind == Binary::kMul) d *= bi->data[b_scalar ? 0 : i];
            (*ga)[a_scalar ? 0 : i] += d;
          }
        }
        if (auto* gb = grad_buffer(*bi)) {
          for (std::size_t i = 0; i < n; ++i) {
            T d = g[i];
            if (kind == Binary::kSub) d = -d;
            if (kind == Binary::kMul) d *= ai->data[a_scalar ? 0 : i];
            (*gb)[b_scalar ? 0 : i] += d;
          }
        }
      });
}

}  // namespace

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  return binary(a, b, Binary::kAdd, "add");
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  return binary(a, b, Binary::kSub, "sub");
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  return binary(a, b, Binary::kMul, "mul");
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T factor) {
  auto av = a.data();
  std::vector<T> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] * factor;
  auto ai = a.impl();
  return Tensor<T>::make_result(a.shape(), std::move(out), {&a},
                                [ai, factor](std::span<const T> g) {
                                  auto& ga = *grad_buffer(*ai);
                                  for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * factor;
                                });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& a) {
  auto av = a.data();
  std::vector<T> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] > T(0) ? av[i] : T(0);
  auto ai = a.impl();
  return Tensor<T>::make_result(a.shape(), std::move(out), {&a}, [ai](std::span<const T> g) {
    auto& ga = *grad_buffer(*ai);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (ai->data[i] > T(0)) ga[i] += g[i];
    }
  });
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& a) {
  auto av = a.data();
  std::vector<T> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = T(1) / (T(1) + std::exp(-av[i]));
  auto ai = a.impl();
  return Tensor<T>::make_result(a.shape(), out, {&a}, [ai, y = out](std::span<const T> g) {
    auto& ga = *grad_buffer(*ai);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i] * (T(1) - y[i]);
  });
}

template <typename T>
Tensor<T> abs(const Tensor<T>& a) {
  auto av = a.data();
  std::vector<T> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = std::abs(av[i]);
  auto ai = a.impl();
  return Tensor<T>::make_result(a.shape(), std::move(out), {&a}, [ai](std::span<const T> g) {
    auto& ga = *grad_buffer(*ai);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const T x = ai->data[i];
      if (x > T(0)) ga[i] += g[i];
      else if (x < T(0)) ga[i] -= g[i];
    }
  });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& a) {
  T total = T(0);
  for (T v : a.data()) total += v;
  auto ai = a.impl();
  return Tensor<T>::make_result(Shape{}, {total}, {&a}, [ai](std::span<const T> g) {
    auto& ga = *grad_buffer(*ai);
    for (auto& v : ga) v += g[0];
  });
}

template <typename T>
Tensor<T> mean(const Tensor<T>& a) {
  const std::size_t n = a.numel();
  if (n == 0) throw ShapeError("mean: empty tensor");
  T total = T(0);
  for (T v : a.data()) total += v;
  auto ai = a.impl();
  return Tensor<T>::make_result(Shape{}, {total / static_cast<T>(n)}, {&a},
                                [ai, n](std::span<const T> g) {
                                  auto& ga = *grad_buffer(*ai);
                                  const T d = g[0] / static_cast<T>(n);
                                  for (auto& v : ga) v += d;
                                });
}

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  require_rank(a, 2, "matmul", "left operand");
  require_rank(b, 2, "matmul", "right operand");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw ShapeError("matmul: inner dimensions differ (left dim 1 is " + std::to_string(k) +
                     ", right dim 0 is " + std::to_string(b.dim(0)) + ")");
  }
  std::vector<T> out(m * n);
  detail::gemm(false, false, m, n, k, a.data().data(), b.data().data(), out.data(), false);
  auto ai = a.impl();
  auto bi = b.impl();
  return Tensor<T>::make_result(Shape{m, n}, std::move(out), {&a, &b},
                                [ai, bi, m, n, k](std::span<const T> g) {
                                  if (auto* ga = grad_buffer(*ai)) {
                                    detail::gemm(false, true, m, k, n, g.data(), bi->data.data(),
                                                 ga->data(), true);
                                  }
                                  if (auto* gb = grad_buffer(*bi)) {
                                    detail::gemm(true, false, k, n, m, ai->data.data(), g.data(),
                                                 gb->data(), true);
                                  }
                                });
}

template <typename T>
Tensor<T> transpose(const Tensor<T>& a) {
  require_rank(a, 2, "transpose", "operand");
  const std::size_t m = a.dim(0), n = a.dim(1);
  auto av = a.data();
  std::vector<T> out(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = av[i * n + j];
  auto ai = a.impl();
  return Tensor<T>::make_result(Shape{n, m}, std::move(out), {&a}, [ai, m, n](std::span<const T> g) {
    auto& ga = *grad_buffer(*ai);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) ga[i * n + j] += g[j * m + i];
  });
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& a, Shape shape) {
  if (shape_numel(shape) != a.numel()) {
    throw ShapeError("reshape: cannot view " + shape_str(a.shape()) + " as " + shape_str(shape));
  }
  auto av = a.data();
  auto ai = a.impl();
  return Tensor<T>::make_result(std::move(shape), std::vector<T>(av.begin(), av.end()), {&a},
                                [ai](std::span<const T> g) {
                                  auto& ga = *grad_buffer(*ai);
                                  for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                                });
}

template <typename T>
Tensor<T> l2_normalize(const Tensor<T>& a, std::size_t axis) {
  const auto sp = split_axis(a.shape(), axis, "l2_normalize");
  auto av = a.data();
  std::vector<T> out(av.size(), T(0));
  std::vector<T> norms(sp.outer * sp.inner);
  for (std::size_t o = 0; o < sp.outer; ++o) {
    for (std::size_t i = 0; i < sp.inner; ++i) {
      const std::size_t base = o * sp.len * sp.inner + i;
      T sq = T(0);
      for (std::size_t l = 0; l < sp.len; ++l) sq += av[base + l * sp.inner] * av[base + l * sp.inner];
      const T norm = std::sqrt(sq);
      norms[o * sp.inner + i] = norm;
      if (norm < T(1e-12)) continue;
      for (std::size_t l = 0; l < sp.len; ++l) out[base + l * sp.inner] = av[base + l * sp.inner] / norm;
    }
  }
  auto ai = a.impl();
  return Tensor<T>::make_result(
      a.shape(), out, {&a}, [ai, sp, y = out, norms = std::move(norms)](std::span<const T> g) {
        auto& ga = *grad_buffer(*ai);
        for (std::size_t o = 0; o < sp.outer; ++o) {
          for (std::size_t i = 0; i < sp.inner; ++i) {
            const T norm = norms[o * sp.inner + i];
            if (norm < T(1e-12)) continue;
            const std::size_t base = o * sp.len * sp.inner + i;
            T dot = T(0);
            for (std::size_t l = 0; l < sp.len; ++l) dot += g[base + l * sp.inner] * y[base + l * sp.inner];
            for (std::size_t l = 0; l < sp.len; ++l) {
              const std::size_t idx = base + l * sp.inner;
              ga[idx] += (g[idx] - y[idx] * dot) / norm;
            }
          }
        }
      });
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& a, std::size_t axis) {
  using Row = Eigen::Array<T, Eigen::Dynamic, 1>;
  using ConstMap = Eigen::Map<const Row>;
  using MutMap = Eigen::Map<Row>;
  const auto sp = split_axis(a.shape(), axis, "softmax");
  auto av = a.data();
  if (!ConstMap(av.data(), static_cast<Eigen::Index>(av.size())).allFinite()) {
    throw NumericError("softmax: non-finite input");
  }
  auto out = std::make_shared<std::vector<T>>(av.size());
  std::vector<T>& y = *out;
  if (sp.inner == 1) {
    // Eigen's scalar/packet split depends on buffer alignment, so rows go
    // through owned (aligned) scratch to keep results bit-reproducible.
    const auto len = static_cast<Eigen::Index>(sp.len);
    Row buf(len);
    for (std::size_t o = 0; o < sp.outer; ++o) {
      buf = ConstMap(av.data() + o * sp.len, len);
      buf = (buf - buf.maxCoeff()).exp();
      buf /= buf.sum();
      MutMap(y.data() + o * sp.len, len) = buf;
    }
  } else {
    for (std::size_t o = 0; o < sp.outer; ++o) {
      for (std::size_t i = 0; i < sp.inner; ++i) {
        const std::size_t base = o * sp.len * sp.inner + i;
        T mx = -std::numeric_limits<T>::infinity();
        for (std::size_t l = 0; l < sp.len; ++l) mx = std::max(mx, av[base + l * sp.inner]);
        T total = T(0);
        for (std::size_t l = 0; l < sp.len; ++l) {
          const T e = std::exp(av[base + l * sp.inner] - mx);
          y[base + l * sp.inner] = e;
          total += e;
        }
        for (std::size_t l = 0; l < sp.len; ++l) y[base + l * sp.inner] /= total;
      }
    }
  }
  auto ai = a.impl();
  return Tensor<T>::make_result(a.shape(), y, {&a}, [ai, sp, out](std::span<const T> g) {
    auto& ga = *grad_buffer(*ai);
    const std::vector<T>& y = *out;
    for (std::size_t o = 0; o < sp.outer; ++o) {
      for (std::size_t i = 0; i < sp.inner; ++i) {
        const std::size_t base = o * sp.len * sp.inner + i;
        T dot = T(0);
        for (std::size_t l = 0; l < sp.len; ++l) dot += g[base + l * sp.inner] * y[base + l * sp.inner];
        for (std::size_t l = 0; l < sp.len; ++l) {
          const std::size_t idx = base + l * sp.inner;
          ga[idx] += y[idx] * (g[idx] - dot);
        }
      }
    }
  });
}

template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat: no operands");
  const Shape& first = parts.front().shape();
  const auto sp0 = split_axis(first, axis, "concat");
  std::vector<std::size_t> lens;
  std::size_t total_len = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const Shape& s = parts[p].shape();
    bool ok = s.size() == first.size();
    for (std::size_t d = 0; ok && d < s.size(); ++d) ok = d == axis || s[d] == first[d];
    if (!ok) {
      throw ShapeError("concat: operand " + std::to_string(p) + " has shape " + shape_str(s) +
                       ", incompatible with " + shape_str(first) + " outside axis " +
                       std::to_string(axis));
    }
    lens.push_back(s[axis]);
    total_len += s[axis];
  }
  Shape out_shape = first;
  out_shape[axis] = total_len;
  const std::size_t outer = sp0.outer, inner = sp0.inner;
  std::vector<T> out(outer * total_len * inner);
  std::size_t offset = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    auto src = parts[p].data();
    const std::size_t block = lens[p] * inner;
    for (std::size_t o = 0; o < outer; ++o) {
      std::copy_n(src.begin() + o * block, block, out.begin() + (o * total_len + offset) * inner);
    }
    offset += lens[p];
  }
  std::vector<const Tensor<T>*> inputs;
  std::vector<std::shared_ptr<detail::TensorImpl<T>>> impls;
  for (const auto& p : parts) {
    inputs.push_back(&p);
    impls.push_back(p.impl());
  }
  return Tensor<T>::make_result(
      std::move(out_shape), std::move(out), inputs,
      [impls, lens, outer, inner, total_len](std::span<const T> g) {
        std::size_t offset = 0;
        for (std::size_t p = 0; p < impls.size(); ++p) {
          const std::size_t block = lens[p] * inner;
          if (auto* gp = grad_buffer(*impls[p])) {
            for (std::size_t o = 0; o < outer; ++o) {
              const T* src = g.data() + (o * total_len + offset) * inner;
              T* dst = gp->data() + o * block;
              for (std::size_t i = 0; i < block; ++i) dst[i] += src[i];
            }
          }
          offset += lens[p];
        }
      });
}

template <typename T>
Tensor<T> slice(const Tensor<T>& a, std::size_t axis, std::size_t begin, std::size_t end) {
  const auto sp = split_axis(a.shape(), axis, "slice");
  if (begin >= end || end > sp.len) {
    throw ShapeError("slice: range [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") invalid for axis " + std::to_string(axis) + " of extent " +
                     std::to_string(sp.len));
  }
  const std::size_t len = end - begin;
  Shape out_shape = a.shape();
  out_shape[axis] = len;
  auto av = a.data();
  std::vector<T> out(sp.outer * len * sp.inner);
  for (std::size_t o = 0; o < sp.outer; ++o) {
    std::copy_n(av.begin() + (o * sp.len + begin) * sp.inner, len * sp.inner,
                out.begin() + o * len * sp.inner);
  }
  auto ai = a.impl();
  return Tensor<T>::make_result(std::move(out_shape), std::move(out), {&a},
                                [ai, sp, begin, len](std::span<const T> g) {
                                  auto& ga = *grad_buffer(*ai);
                                  for (std::size_t o = 0; o < sp.outer; ++o) {
                                    const T* src = g.data() + o * len * sp.inner;
                                    T* dst = ga.data() + (o * sp.len + begin) * sp.inner;
                                    for (std::size_t i = 0; i < len * sp.inner; ++i) dst[i] += src[i];
                                  }
                                });
}

template <typename T>
Tensor<T> global_avg_pool(const Tensor<T>& a) {
  require_rank(a, 3, "global_avg_pool", "input");
  const std::size_t hw = a.dim(0) * a.dim(1), c = a.dim(2);
  auto av = a.data();
  std::vector<T> out(c, T(0));
  for (std::size_t p = 0; p < hw; ++p)
    for (std::size_t ch = 0; ch < c; ++ch) out[ch] += av[p * c + ch];
  for (auto& v : out) v /= static_cast<T>(hw);
  auto ai = a.impl();
  return Tensor<T>::make_result(Shape{1, 1, c}, std::move(out), {&a}, [ai, hw, c](std::span<const T> g) {
    auto& ga = *grad_buffer(*ai);
    for (std::size_t p = 0; p < hw; ++p)
      for (std::size_t ch = 0; ch < c; ++ch) ga[p * c + ch] += g[ch] / static_cast<T>(hw);
  });
}

template <typename T>
Tensor<T> scale_channels(const Tensor<T>& x, const Tensor<T>& gate) {
  require_rank(x, 3, "scale_channels", "input");
  const std::size_t c = x.dim(2), hw = x.dim(0) * x.dim(1);
  if (gate.numel() != c) {
    throw ShapeError("scale_channels: gate has " + std::to_string(gate.numel()) +
                     " entries but input channel dimension (dim 2) is " + std::to_string(c));
  }
  auto xv = x.data();
  auto gv = gate.data();
  std::vector<T> out(xv.size());
  for (std::size_t p = 0; p < hw; ++p)
    for (std::size_t ch = 0; ch < c; ++ch) out[p * c + ch] = xv[p * c + ch] * gv[ch];
  auto xi = x.impl();
  auto gi = gate.impl();
  return Tensor<T>::make_result(x.shape(), std::move(out), {&x, &gate},
                                [xi, gi, hw, c](std::span<const T> g) {
                                  if (auto* gx = grad_buffer(*xi)) {
                                    for (std::size_t p = 0; p < hw; ++p)
                                      for (std::size_t ch = 0; ch < c; ++ch)
                                        (*gx)[p * c + ch] += g[p * c + ch] * gi->data[ch];
                                  }
                                  if (auto* gg = grad_buffer(*gi)) {
                                    for (std::size_t p = 0; p < hw; ++p)
                                      for (std::size_t ch = 0; ch < c; ++ch)
                                        (*gg)[ch] += g[p * c + ch] * xi->data[p * c + ch];
                                  }
                                });
}

template <typename T>
Tensor<T> scale_pixels(const Tensor<T>& x, const Tensor<T>& weight) {
  require_rank(x, 3, "scale_pixels", "input");
  const std::size_t c = x.dim(2), hw = x.dim(0) * x.dim(1);
  if (weight.shape() != Shape{x.dim(0), x.dim(1), 1}) {
    throw ShapeError("scale_pixels: weight shape " + shape_str(weight.shape()) +
                     " does not match input spatial shape " + shape_str({x.dim(0), x.dim(1), 1}));
  }
  auto xv = x.data();
  auto wv = weight.data();
  std::vector<T> out(xv.size());
  for (std::size_t p = 0; p < hw; ++p)
    for (std::size_t ch = 0; ch < c; ++ch) out[p * c + ch] = xv[p * c + ch] * wv[p];
  auto xi = x.impl();
  auto wi = weight.impl();
  return Tensor<T>::make_result(x.shape(), std::move(out), {&x, &weight},
                                [xi, wi, hw, c](std::span<const T> g) {
                                  if (auto* gx = grad_buffer(*xi)) {
                                    for (std::size_t p = 0; p < hw; ++p)
                                      for (std::size_t ch = 0; ch < c; ++ch)
                                        (*gx)[p * c + ch] += g[p * c + ch] * wi->data[p];
                                  }
                                  if (auto* gw = grad_buffer(*wi)) {
                                    for (std::size_t p = 0; p < hw; ++p)
                                      for (std::size_t ch = 0; ch < c; ++ch)
                                        (*gw)[p] += g[p * c + ch] * xi->data[p * c + ch];
                                  }
                                });
}

template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias,
                 std::size_t padding) {
  require_rank(input, 3, "conv2d", "input");
  require_rank(weight, 4, "conv2d", "weight");
  const std::size_t h = input.dim(0), w = input.dim(1), cin = input.dim(2);
  const std::size_t k = weight.dim(0), cout = weight.dim(3);
  if (weight.dim(1) != k) {
    throw ShapeError("conv2d: weight dims 0 and 1 must match (kernel " + std::to_string(k) + "x" +
                     std::to_string(weight.dim(1)) + ")");
  }
  if (k % 2 == 0) throw ShapeError("conv2d: kernel size " + std::to_string(k) + " must be odd");
  if (weight.dim(2) != cin) {
    throw ShapeError("conv2d: input channel dimension (dim 2) is " + std::to_string(cin) +
                     " but weight expects cin=" + std::to_string(weight.dim(2)));
  }
  if (bias.defined() && bias.numel() != cout) {
    throw ShapeError("conv2d: bias has " + std::to_string(bias.numel()) +
                     " entries but weight output dimension (dim 3) is " + std::to_string(cout));
  }
  if (h + 2 * padding < k || w + 2 * padding < k) {
    throw ShapeError("conv2d: kernel " + std::to_string(k) + " larger than padded input " +
                     std::to_string(h + 2 * padding) + "x" + std::to_string(w + 2 * padding));
  }
  const std::size_t ho = h + 2 * padding - k + 1, wo = w + 2 * padding - k + 1;
  const std::size_t rows = ho * wo, cols = k * k * cin;

  auto xv = input.data();
  const bool identity_gather = k == 1 && padding == 0;
  std::vector<T> col;
  if (!identity_gather) {
    col.assign(rows * cols, T(0));
    for (std::size_t oy = 0; oy < ho; ++oy) {
      for (std::size_t ox = 0; ox < wo; ++ox) {
        T* dst = col.data() + (oy * wo + ox) * cols;
        for (std::size_t ky = 0; ky < k; ++ky) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy + ky) - static_cast<std::ptrdiff_t>(padding);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
          for (std::size_t kx = 0; kx < k; ++kx) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox + kx) - static_cast<std::ptrdiff_t>(padding);
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
            std::copy_n(xv.data() + (static_cast<std::size_t>(iy) * w + static_cast<std::size_t>(ix)) * cin, cin,
                        dst + (ky * k + kx) * cin);
          }
        }
      }
    }
  }
  const T* col_ptr = identity_gather ? xv.data() : col.data();

  std::vector<T> out(rows * cout);
  detail::gemm(false, false, rows, cout, cols, col_ptr, weight.data().data(), out.data(), false);
  if (bias.defined()) {
    auto bv = bias.data();
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cout; ++c) out[r * cout + c] += bv[c];
  }

  auto xi = input.impl();
  auto wi = weight.impl();
  auto bi = bias.impl();
  const bool record = grad_enabled();
  return Tensor<T>::make_result(
      Shape{ho, wo, cout}, std::move(out), {&input, &weight, &bias},
      [xi, wi, bi, col = record ? std::move(col) : std::vector<T>{}, identity_gather, h, w, cin,
       k, cout, padding, ho, wo, rows, cols](std::span<const T> g) {
        const T* cols_data = identity_gather ? xi->data.data() : col.data();
        if (auto* gw = grad_buffer(*wi)) {
          detail::gemm(true, false, cols, cout, rows, cols_data, g.data(), gw->data(), true);
        }
        if (bi) {
          if (auto* gb = grad_buffer(*bi)) {
            for (std::size_t r = 0; r < rows; ++r)
              for (std::size_t c = 0; c < cout; ++c) (*gb)[c] += g[r * cout + c];
          }
        }
        if (auto* gx = grad_buffer(*xi)) {
          if (identity_gather) {
            detail::gemm(false, true, rows, cols, cout, g.data(), wi->data.data(), gx->data(), true);
            return;
          }
          std::vector<T> dcol(rows * cols);
          detail::gemm(false, true, rows, cols, cout, g.data(), wi->data.data(), dcol.data(), false);
          for (std::size_t oy = 0; oy < ho; ++oy) {
            for (std::size_t ox = 0; ox < wo; ++ox) {
              const T* src = dcol.data() + (oy * wo + ox) * cols;
              for (std::size_t ky = 0; ky < k; ++ky) {
                const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy + ky) - static_cast<std::ptrdiff_t>(padding);
                if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
                for (std::size_t kx = 0; kx < k; ++kx) {
                  const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox + kx) - static_cast<std::ptrdiff_t>(padding);
                  if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
                  T* dst = gx->data() + (static_cast<std::size_t>(iy) * w + static_cast<std::size_t>(ix)) * cin;
                  const T* s = src + (ky * k + kx) * cin;
                  for (std::size_t c = 0; c < cin; ++c) dst[c] += s[c];
                }
              }
            }
          }
        }
      });
}

template <typename T>
Tensor<T> pixel_unshuffle(const Tensor<T>& a, std::size_t s) {
  require_rank(a, 3, "pixel_unshuffle", "input");
  if (s == 0) throw ShapeError("pixel_unshuffle: scale s must be positive");
  const std::size_t h = a.dim(0), w = a.dim(1), c = a.dim(2);
  if (h % s != 0) {
    throw ShapeError("pixel_unshuffle: height (dim 0) " + std::to_string(h) +
                     " is not divisible by s=" + std::to_string(s));
  }
  if (w % s != 0) {
    throw ShapeError("pixel_unshuffle: width (dim 1) " + std::to_string(w) +
                     " is not divisible by s=" + std::to_string(s));
  }
  const std::size_t ho = h / s, wo = w / s, co = c * s * s;
  // index map: output flat index -> input flat index
  std::vector<std::size_t> src(h * w * c);
  for (std::size_t oy = 0; oy < ho; ++oy)
    for (std::size_t ox = 0; ox < wo; ++ox)
      for (std::size_t ci = 0; ci < c; ++ci)
        for (std::size_t dy = 0; dy < s; ++dy)
          for (std::size_t dx = 0; dx < s; ++dx) {
            const std::size_t o = (oy * wo + ox) * co + ci * s * s + dy * s + dx;
            src[o] = ((oy * s + dy) * w + ox * s + dx) * c + ci;
          }
  auto av = a.data();
  std::vector<T> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[src[i]];
  auto ai = a.impl();
  return Tensor<T>::make_result(Shape{ho, wo, co}, std::move(out), {&a},
                                [ai, src = std::move(src)](std::span<const T> g) {
                                  auto& ga = *grad_buffer(*ai);
                                  for (std::size_t i = 0; i < g.size(); ++i) ga[src[i]] += g[i];
                                });
}

template <typename T>
Tensor<T> pixel_shuffle(const Tensor<T>& a, std::size_t s) {
  require_rank(a, 3, "pixel_shuffle", "input");
  if (s == 0) throw ShapeError("pixel_shuffle: scale s must be positive");
  const std::size_t h = a.dim(0), w = a.dim(1), c = a.dim(2);
  if (c % (s * s) != 0) {
    throw ShapeError("pixel_shuffle: channel dimension (dim 2) " + std::to_string(c) +
                     " is not divisible by s*s=" + std::to_string(s * s));
  }
  const std::size_t co = c / (s * s), ho = h * s, wo = w * s;
  // index map: output flat index -> input flat index
  std::vector<std::size_t> src(h * w * c);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t ci = 0; ci < co; ++ci)
        for (std::size_t dy = 0; dy < s; ++dy)
          for (std::size_t dx = 0; dx < s; ++dx) {
            const std::size_t o = ((y * s + dy) * wo + x * s + dx) * co + ci;
            src[o] = (y * w + x) * c + ci * s * s + dy * s + dx;
          }
  auto av = a.data();
  std::vector<T> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[src[i]];
  auto ai = a.impl();
  return Tensor<T>::make_result(Shape{ho, wo, co}, std::move(out), {&a},
                                [ai, src = std::move(src)](std::span<const T> g) {
                                  auto& ga = *grad_buffer(*ai);
                                  for (std::size_t i = 0; i < g.size(); ++i) ga[src[i]] += g[i];
                                });
}

template <typename T>
Tensor<T> forward_diff(const Tensor<T>& a, std::size_t axis) {
  const auto sp = split_axis(a.shape(), axis, "forward_diff");
  if (sp.len < 2) {
    throw ShapeError("forward_diff: axis " + std::to_string(axis) + " needs extent >= 2");
  }
  Shape out_shape = a.shape();
  out_shape[axis] = sp.len - 1;
  auto av = a.data();
  const std::size_t len = sp.len - 1;
  std::vector<T> out(sp.outer * len * sp.inner);
  for (std::size_t o = 0; o < sp.outer; ++o)
    for (std::size_t l = 0; l < len; ++l)
      for (std::size_t i = 0; i < sp.inner; ++i)
        out[(o * len + l) * sp.inner + i] =
            av[(o * sp.len + l + 1) * sp.inner + i] - av[(o * sp.len + l) * sp.inner + i];
  auto ai = a.impl();
  return Tensor<T>::make_result(std::move(out_shape), std::move(out), {&a},
                                [ai, sp, len](std::span<const T> g) {
                                  auto& ga = *grad_buffer(*ai);
                                  for (std::size_t o = 0; o < sp.outer; ++o)
                                    for (std::size_t l = 0; l < len; ++l)
                                      for (std::size_t i = 0; i < sp.inner; ++i) {
                                        const T d = g[(o * len + l) * sp.inner + i];
                                        ga[(o * sp.len + l + 1) * sp.inner + i] += d;
                                        ga[(o * sp.len + l) * sp.inner + i] -= d;
                                      }
                                });
}

template <typename T>
RowMax<T> row_max(const Tensor<T>& a) {
  require_rank(a, 2, "row_max", "input");
  const std::size_t n = a.dim(0), m = a.dim(1);
  if (m == 0) throw ShapeError("row_max: rows are empty");
  auto av = a.data();
  std::vector<T> values(n);
  std::vector<std::size_t> indices(n);
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < m; ++j) {
      if (av[r * m + j] > av[r * m + best]) best = j;
    }
    indices[r] = best;
    values[r] = av[r * m + best];
  }
  auto ai = a.impl();
  Tensor<T> vals = Tensor<T>::make_result(Shape{n}, std::move(values), {&a},
                                          [ai, indices, m](std::span<const T> g) {
                                            auto& ga = *grad_buffer(*ai);
                                            for (std::size_t r = 0; r < g.size(); ++r)
                                              ga[r * m + indices[r]] += g[r];
                                          });
  return RowMax<T>{std::move(vals), std::move(indices)};
}

template <typename T>
Tensor<T> gather_rows(const Tensor<T>& a, const std::vector<std::size_t>& rows) {
  require_rank(a, 2, "gather_rows", "input");
  const std::size_t n = a.dim(0), d = a.dim(1);
  auto av = a.data();
  std::vector<T> out(rows.size() * d);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= n) {
      throw ShapeError("gather_rows: row index " + std::to_string(rows[r]) + " out of range " +
                       std::to_string(n));
    }
    std::copy_n(av.begin() + rows[r] * d, d, out.begin() + r * d);
  }
  auto ai = a.impl();
  return Tensor<T>::make_result(Shape{rows.size(), d}, std::move(out), {&a},
                                [ai, rows, d](std::span<const T> g) {
                                  auto& ga = *grad_buffer(*ai);
                                  for (std::size_t r = 0; r < rows.size(); ++r)
                                    for (std::size_t j = 0; j < d; ++j) ga[rows[r] * d + j] += g[r * d + j];
                                });
}

#define TAIN_INSTANTIATE_OPS(T)                                                                \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                  \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                                  \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                                  \
  template Tensor<T> scale(const Tensor<T>&, T);                                               \
  template Tensor<T> relu(const Tensor<T>&);                                                   \
  template Tensor<T> sigmoid(const Tensor<T>&);                                                \
  template Tensor<T> abs(const Tensor<T>&);                                                    \
  template Tensor<T> sum(const Tensor<T>&);                                                    \
  template Tensor<T> mean(const Tensor<T>&);                                                   \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                               \
  template Tensor<T> transpose(const Tensor<T>&);                                              \
  template Tensor<T> reshape(const Tensor<T>&, Shape);                                         \
  template Tensor<T> l2_normalize(const Tensor<T>&, std::size_t);                              \
  template Tensor<T> softmax(const Tensor<T>&, std::size_t);                                   \
  template Tensor<T> concat(const std::vector<Tensor<T>>&, std::size_t);                       \
  template Tensor<T> slice(const Tensor<T>&, std::size_t, std::size_t, std::size_t);           \
  template Tensor<T> global_avg_pool(const Tensor<T>&);                                        \
  template Tensor<T> scale_channels(const Tensor<T>&, const Tensor<T>&);                       \
  template Tensor<T> scale_pixels(const Tensor<T>&, const Tensor<T>&);                         \
  template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, std::size_t); \
  template Tensor<T> pixel_unshuffle(const Tensor<T>&, std::size_t);                           \
  template Tensor<T> pixel_shuffle(const Tensor<T>&, std::size_t);                             \
  template Tensor<T> forward_diff(const Tensor<T>&, std::size_t);                              \
  template RowMax<T> row_max(const Tensor<T>&);                                                \
  template Tensor<T> gather_rows(const Tensor<T>&, const std::vector<std::size_t>&);

TAIN_INSTANTIATE_OPS(float)
TAIN_INSTANTIATE_OPS(double)

#undef TAIN_INSTANTIATE_OPS

}  // namespace tain::ops

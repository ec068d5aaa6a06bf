// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#include "rotequiv/tensor.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <numeric>
#include <sstream>

namespace rotequiv {

std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

int out_size(const ConvSpec& spec, int s_in) {
  if (spec.k < 1 || spec.s < 1 || spec.p < 0 || spec.d < 1) {
    throw ShapeError("invalid conv spec " + to_string(spec));
  }
  if (s_in < 1) throw ShapeError("input extent must be >= 1, got " + std::to_string(s_in));
  const int numer = s_in + 2 * spec.p - spec.d * (spec.k - 1) - 1;
  if (numer < 0) {
    throw ShapeError("extent " + std::to_string(s_in) + " too small for " + to_string(spec));
  }
  return numer / spec.s + 1;
}

int lattice_residue(const ConvSpec& spec, int s_in) {
  const int padded = s_in + 2 * spec.p;
  const int eff_k = spec.d * (spec.k - 1) + 1;
  return ((padded - eff_k) % spec.s + spec.s) % spec.s;
}

std::string to_string(const ConvSpec& spec) {
  std::ostringstream os;
  os << "(k=" << spec.k << ", p=" << spec.p << ", s=" << spec.s << ", d=" << spec.d << ')';
  return os.str();
}

namespace {

std::vector<std::size_t> strides_of(const Shape& shape) {
  std::vector<std::size_t> st(shape.size(), 1);
  for (std::size_t i = shape.size(); i-- > 1;) st[i - 1] = st[i] * shape[i];
  return st;
}

void require_same_shape(const Shape& a, const Shape& b, const char* op) {
  if (a != b) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a) + " vs " + shape_str(b));
  }
}

void require_nchw(const Shape& s, const char* op) {
  if (s.size() != 4) throw ShapeError(std::string(op) + ": expected NCHW, got " + shape_str(s));
}

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Iterates over every combination of the axes not in {a0, a1}, calling
// fn(offset_in, offset_out) with the base offsets of the 2-D plane.
template <typename Fn>
void for_each_plane(const Shape& in_shape, const std::vector<std::size_t>& in_st,
                    const std::vector<std::size_t>& out_st, std::size_t a0, std::size_t a1,
                    Fn&& fn) {
  std::vector<std::size_t> others;
  for (std::size_t d = 0; d < in_shape.size(); ++d) {
    if (d != a0 && d != a1) others.push_back(d);
  }
  std::vector<std::size_t> idx(others.size(), 0);
  while (true) {
    std::size_t bi = 0, bo = 0;
    for (std::size_t j = 0; j < others.size(); ++j) {
      bi += idx[j] * in_st[others[j]];
      bo += idx[j] * out_st[others[j]];
    }
    fn(bi, bo);
    std::size_t j = others.size();
    while (j > 0) {
      --j;
      if (++idx[j] < in_shape[others[j]]) break;
      idx[j] = 0;
      if (j == 0) return;
    }
    if (others.empty()) return;
  }
}

template <typename T>
void im2col(const T* x, std::size_t channels, int h, int w, const ConvSpec& spec, int ho, int wo,
            T* col) {
  const int k = spec.k;
  const std::size_t hw_out = static_cast<std::size_t>(ho) * wo;
  for (std::size_t c = 0; c < channels; ++c) {
    const T* plane = x + c * static_cast<std::size_t>(h) * w;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        T* row = col + ((c * k + ky) * k + kx) * hw_out;
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * spec.s - spec.p + ky;
          T* dst = row + static_cast<std::size_t>(oy) * wo;
          if (iy < 0 || iy >= h) {
            std::fill(dst, dst + wo, T(0));
            continue;
          }
          const T* src = plane + static_cast<std::size_t>(iy) * w;
          if (spec.s == 1) {
            const int x0 = kx - spec.p;
            for (int ox = 0; ox < wo; ++ox) {
              const int ix = x0 + ox;
              dst[ox] = (ix >= 0 && ix < w) ? src[ix] : T(0);
            }
          } else {
            for (int ox = 0; ox < wo; ++ox) {
              const int ix = ox * spec.s - spec.p + kx;
              dst[ox] = (ix >= 0 && ix < w) ? src[ix] : T(0);
            }
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const T* col, std::size_t channels, int h, int w, const ConvSpec& spec, int ho,
                int wo, T* x) {
  const int k = spec.k;
  const std::size_t hw_out = static_cast<std::size_t>(ho) * wo;
  for (std::size_t c = 0; c < channels; ++c) {
    T* plane = x + c * static_cast<std::size_t>(h) * w;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const T* row = col + ((c * k + ky) * k + kx) * hw_out;
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * spec.s - spec.p + ky;
          if (iy < 0 || iy >= h) continue;
          T* dst = plane + static_cast<std::size_t>(iy) * w;
          const T* src = row + static_cast<std::size_t>(oy) * wo;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox * spec.s - spec.p + kx;
            if (ix >= 0 && ix < w) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

void check_conv_spec(const ConvSpec& spec) {
  if (spec.d != 1) throw ShapeError("conv2d: dilation other than 1 is not supported");
}

}  // namespace

// --- Tensor members -------------------------------------------------------

template <typename T>
Tensor<T>::Tensor(Shape shape, T fill) : shape_(std::move(shape)), data_(shape_numel(shape_), fill) {
  for (auto d : shape_) {
    if (d == 0) throw ShapeError("tensor extents must be positive: " + shape_str(shape_));
  }
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
  for (auto d : shape_) {
    if (d == 0) throw ShapeError("tensor extents must be positive: " + shape_str(shape_));
  }
  if (shape_numel(shape_) != data_.size()) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                     " does not match shape " + shape_str(shape_));
  }
}

template <typename T>
Tensor<T> Tensor<T>::randn(Shape shape, Rng& rng, T stddev) {
  Tensor t(std::move(shape));
  for (auto& v : t.data_) v = static_cast<T>(rng.normal()) * stddev;
  return t;
}

template <typename T>
Tensor<T> Tensor<T>::uniform(Shape shape, Rng& rng, T lo, T hi) {
  Tensor t(std::move(shape));
  for (auto& v : t.data_) v = static_cast<T>(rng.uniform(lo, hi));
  return t;
}

template <typename T>
std::size_t Tensor<T>::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for " + shape_str(shape_));
  }
  return shape_[axis];
}

template <typename T>
std::size_t Tensor<T>::offset(std::initializer_list<std::size_t> index) const {
  if (index.size() != shape_.size()) {
    throw ShapeError("index rank mismatch for shape " + shape_str(shape_));
  }
  std::size_t off = 0;
  std::size_t d = 0;
  for (auto i : index) {
    if (i >= shape_[d]) throw ShapeError("index out of range for shape " + shape_str(shape_));
    off = off * shape_[d] + i;
    ++d;
  }
  return off;
}

template <typename T>
T Tensor<T>::item() const {
  if (data_.size() != 1) throw ShapeError("item() on tensor of shape " + shape_str(shape_));
  return data_[0];
}

template <typename T>
Tensor<T> Tensor<T>::reshaped(Shape shape) const {
  if (shape_numel(shape) != data_.size()) {
    throw ShapeError("cannot reshape " + shape_str(shape_) + " to " + shape_str(shape));
  }
  return Tensor(std::move(shape), data_);
}

template <typename T>
bool Tensor<T>::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
}

template <typename T>
bool bitwise_equal(const Tensor<T>& a, const Tensor<T>& b) {
  return a.shape() == b.shape() &&
         std::memcmp(a.ptr(), b.ptr(), a.numel() * sizeof(T)) == 0;
}

template <typename T>
void check_finite(const Tensor<T>& t, const std::string& context) {
  if (!t.all_finite()) throw NumericError("non-finite value in " + context);
}

// --- geometry -------------------------------------------------------------

template <typename T>
Tensor<T> rot90(const Tensor<T>& t, int quarter_turns, std::pair<int, int> axes) {
  const int rank = static_cast<int>(t.rank());
  auto [a0, a1] = axes;
  if (a0 < 0) a0 += rank;
  if (a1 < 0) a1 += rank;
  if (a0 < 0 || a1 < 0 || a0 >= rank || a1 >= rank || a0 == a1) {
    throw ShapeError("rot90: invalid axes for shape " + shape_str(t.shape()));
  }
  const int q = ((quarter_turns % 4) + 4) % 4;
  const std::size_t h = t.shape()[a0];
  const std::size_t w = t.shape()[a1];
  if ((q % 2 == 1) && h != w) {
    throw ShapeError("rot90: odd quarter turns need equal extents, got " + shape_str(t.shape()));
  }
  if (q == 0) return t;
  Tensor<T> out(t.shape());
  const auto st = strides_of(t.shape());
  const std::size_t s0 = st[a0], s1 = st[a1];
  const T* src = t.ptr();
  T* dst = out.ptr();
  for_each_plane(t.shape(), st, st, static_cast<std::size_t>(a0), static_cast<std::size_t>(a1),
                 [&](std::size_t bi, std::size_t bo) {
                   for (std::size_t r = 0; r < h; ++r) {
                     for (std::size_t c = 0; c < w; ++c) {
                       std::size_t ir, ic;
                       switch (q) {
                         case 1: ir = h - 1 - c; ic = r; break;
                         case 2: ir = h - 1 - r; ic = w - 1 - c; break;
                         default: ir = c; ic = w - 1 - r; break;
                       }
                       dst[bo + r * s0 + c * s1] = src[bi + ir * s0 + ic * s1];
                     }
                   }
                 });
  return out;
}

template <typename T>
Tensor<T> roll(const Tensor<T>& t, long shift, int axis) {
  const int rank = static_cast<int>(t.rank());
  if (axis < 0) axis += rank;
  if (axis < 0 || axis >= rank) throw ShapeError("roll: axis out of range for " + shape_str(t.shape()));
  const auto n = static_cast<long>(t.shape()[axis]);
  const long sh = ((shift % n) + n) % n;
  if (sh == 0) return t;
  const auto st = strides_of(t.shape());
  const std::size_t stride = st[axis];
  const std::size_t outer = t.numel() / (stride * n);
  Tensor<T> out(t.shape());
  for (std::size_t o = 0; o < outer; ++o) {
    const std::size_t base = o * stride * n;
    for (long i = 0; i < n; ++i) {
      const long src_i = (i - sh + n) % n;
      std::copy_n(t.ptr() + base + src_i * stride, stride, out.ptr() + base + i * stride);
    }
  }
  return out;
}

// --- elementwise ------------------------------------------------------------

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a.shape(), b.shape(), "add");
  Tensor<T> out(a.shape());
  for (std::size_t i = 0; i < a.numel(); ++i) out[i] = a[i] + b[i];
  return out;
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a.shape(), b.shape(), "sub");
  Tensor<T> out(a.shape());
  for (std::size_t i = 0; i < a.numel(); ++i) out[i] = a[i] - b[i];
  return out;
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a.shape(), b.shape(), "mul");
  Tensor<T> out(a.shape());
  for (std::size_t i = 0; i < a.numel(); ++i) out[i] = a[i] * b[i];
  return out;
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T factor) {
  Tensor<T> out(a.shape());
  for (std::size_t i = 0; i < a.numel(); ++i) out[i] = a[i] * factor;
  return out;
}

template <typename T>
Tensor<T> silu(const Tensor<T>& a) {
  Tensor<T> out(a.shape());
  for (std::size_t i = 0; i < a.numel(); ++i) out[i] = a[i] / (T(1) + std::exp(-a[i]));
  return out;
}

template <typename T>
Tensor<T> relu(const Tensor<T>& a) {
  Tensor<T> out(a.shape());
  for (std::size_t i = 0; i < a.numel(); ++i) out[i] = a[i] > T(0) ? a[i] : T(0);
  return out;
}

template <typename T>
Tensor<T> hard_sigmoid(const Tensor<T>& a) {
  Tensor<T> out(a.shape());
  for (std::size_t i = 0; i < a.numel(); ++i) {
    out[i] = std::clamp(a[i] / T(6) + T(0.5), T(0), T(1));
  }
  return out;
}

template <typename T>
Tensor<T> global_avg_pool(const Tensor<T>& x) {
  require_nchw(x.shape(), "global_avg_pool");
  const std::size_t n = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3);
  Tensor<T> out({n, c});
  for (std::size_t i = 0; i < n * c; ++i) {
    const T* p = x.ptr() + i * hw;
    T acc = 0;
    for (std::size_t j = 0; j < hw; ++j) acc += p[j];
    out[i] = acc / static_cast<T>(hw);
  }
  return out;
}

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw ShapeError("matmul: incompatible shapes " + shape_str(a.shape()) + " x " +
                     shape_str(b.shape()));
  }
  const auto m = static_cast<Eigen::Index>(a.dim(0));
  const auto k = static_cast<Eigen::Index>(a.dim(1));
  const auto n = static_cast<Eigen::Index>(b.dim(1));
  Tensor<T> out({a.dim(0), b.dim(1)});
  Eigen::Map<const RowMat<T>> ma(a.ptr(), m, k);
  Eigen::Map<const RowMat<T>> mb(b.ptr(), k, n);
  Eigen::Map<RowMat<T>> mo(out.ptr(), m, n);
  mo.noalias() = ma * mb;
  return out;
}

template <typename T>
Tensor<T> transpose(const Tensor<T>& a) {
  if (a.rank() != 2) throw ShapeError("transpose: expected rank 2, got " + shape_str(a.shape()));
  const std::size_t m = a.dim(0), n = a.dim(1);
  Tensor<T> out({n, m});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = a[i * n + j];
  return out;
}

template <typename T>
Tensor<T> pad2d(const Tensor<T>& x, int pad) {
  if (x.rank() < 2) throw ShapeError("pad2d: rank must be >= 2");
  if (pad < 0) throw ShapeError("pad2d: negative padding");
  if (pad == 0) return x;
  Shape s = x.shape();
  const std::size_t h = s[s.size() - 2], w = s[s.size() - 1];
  const std::size_t hp = h + 2 * pad, wp = w + 2 * pad;
  s[s.size() - 2] = hp;
  s[s.size() - 1] = wp;
  Tensor<T> out(s);
  const std::size_t planes = x.numel() / (h * w);
  for (std::size_t pl = 0; pl < planes; ++pl) {
    for (std::size_t r = 0; r < h; ++r) {
      std::copy_n(x.ptr() + (pl * h + r) * w, w, out.ptr() + (pl * hp + r + pad) * wp + pad);
    }
  }
  return out;
}

template <typename T>
Tensor<T> crop2d(const Tensor<T>& x, int pad) {
  if (x.rank() < 2) throw ShapeError("crop2d: rank must be >= 2");
  if (pad == 0) return x;
  Shape s = x.shape();
  const std::size_t hp = s[s.size() - 2], wp = s[s.size() - 1];
  if (pad < 0 || hp <= 2 * static_cast<std::size_t>(pad) || wp <= 2 * static_cast<std::size_t>(pad)) {
    throw ShapeError("crop2d: invalid crop for " + shape_str(s));
  }
  const std::size_t h = hp - 2 * pad, w = wp - 2 * pad;
  s[s.size() - 2] = h;
  s[s.size() - 1] = w;
  Tensor<T> out(s);
  const std::size_t planes = x.numel() / (hp * wp);
  for (std::size_t pl = 0; pl < planes; ++pl) {
    for (std::size_t r = 0; r < h; ++r) {
      std::copy_n(x.ptr() + (pl * hp + r + pad) * wp + pad, w, out.ptr() + (pl * h + r) * w);
    }
  }
  return out;
}

// --- convolution --------------------------------------------------------------

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& kernel, const ConvSpec& spec) {
  check_conv_spec(spec);
  require_nchw(x.shape(), "conv2d input");
  require_nchw(kernel.shape(), "conv2d kernel");
  const std::size_t n = x.dim(0), ci = x.dim(1);
  const int h = static_cast<int>(x.dim(2)), w = static_cast<int>(x.dim(3));
  const std::size_t co = kernel.dim(0);
  if (kernel.dim(1) != ci) {
    throw ShapeError("conv2d: kernel expects " + std::to_string(kernel.dim(1)) +
                     " input channels, input has " + std::to_string(ci));
  }
  if (kernel.dim(2) != static_cast<std::size_t>(spec.k) || kernel.dim(3) != static_cast<std::size_t>(spec.k)) {
    throw ShapeError("conv2d: kernel " + shape_str(kernel.shape()) + " does not match " + to_string(spec));
  }
  const int ho = out_size(spec, h), wo = out_size(spec, w);
  const std::size_t kk = ci * spec.k * spec.k;
  const std::size_t hw_out = static_cast<std::size_t>(ho) * wo;
  Tensor<T> out({n, co, static_cast<std::size_t>(ho), static_cast<std::size_t>(wo)});
  std::vector<T> col(kk * hw_out);
  Eigen::Map<const RowMat<T>> wk(kernel.ptr(), co, kk);
  for (std::size_t b = 0; b < n; ++b) {
    im2col(x.ptr() + b * ci * h * w, ci, h, w, spec, ho, wo, col.data());
    Eigen::Map<const RowMat<T>> mc(col.data(), kk, hw_out);
    Eigen::Map<RowMat<T>> mo(out.ptr() + b * co * hw_out, co, hw_out);
    mo.noalias() = wk * mc;
  }
  return out;
}

template <typename T>
Tensor<T> conv2d_grad_input(const Tensor<T>& grad_out, const Tensor<T>& kernel,
                            const Shape& input_shape, const ConvSpec& spec) {
  check_conv_spec(spec);
  require_nchw(input_shape, "conv2d_grad_input");
  const std::size_t n = input_shape[0], ci = input_shape[1];
  const int h = static_cast<int>(input_shape[2]), w = static_cast<int>(input_shape[3]);
  const std::size_t co = kernel.dim(0);
  const int ho = out_size(spec, h), wo = out_size(spec, w);
  const Shape expect{n, co, static_cast<std::size_t>(ho), static_cast<std::size_t>(wo)};
  require_same_shape(grad_out.shape(), expect, "conv2d_grad_input");
  const std::size_t kk = ci * spec.k * spec.k;
  const std::size_t hw_out = static_cast<std::size_t>(ho) * wo;
  Tensor<T> gx(input_shape);
  std::vector<T> col(kk * hw_out);
  Eigen::Map<const RowMat<T>> wk(kernel.ptr(), co, kk);
  for (std::size_t b = 0; b < n; ++b) {
    Eigen::Map<const RowMat<T>> go(grad_out.ptr() + b * co * hw_out, co, hw_out);
    Eigen::Map<RowMat<T>> mc(col.data(), kk, hw_out);
    mc.noalias() = wk.transpose() * go;
    col2im_add(col.data(), ci, h, w, spec, ho, wo, gx.ptr() + b * ci * h * w);
  }
  return gx;
}

template <typename T>
Tensor<T> conv2d_grad_kernel(const Tensor<T>& x, const Tensor<T>& grad_out,
                             const Shape& kernel_shape, const ConvSpec& spec) {
  check_conv_spec(spec);
  require_nchw(x.shape(), "conv2d_grad_kernel");
  const std::size_t n = x.dim(0), ci = x.dim(1);
  const int h = static_cast<int>(x.dim(2)), w = static_cast<int>(x.dim(3));
  const std::size_t co = kernel_shape.at(0);
  const int ho = out_size(spec, h), wo = out_size(spec, w);
  const Shape expect{n, co, static_cast<std::size_t>(ho), static_cast<std::size_t>(wo)};
  require_same_shape(grad_out.shape(), expect, "conv2d_grad_kernel");
  const std::size_t kk = ci * spec.k * spec.k;
  const std::size_t hw_out = static_cast<std::size_t>(ho) * wo;
  Tensor<T> gk(kernel_shape);
  std::vector<T> col(kk * hw_out);
  Eigen::Map<RowMat<T>> gw(gk.ptr(), co, kk);
  for (std::size_t b = 0; b < n; ++b) {
    im2col(x.ptr() + b * ci * h * w, ci, h, w, spec, ho, wo, col.data());
    Eigen::Map<const RowMat<T>> mc(col.data(), kk, hw_out);
    Eigen::Map<const RowMat<T>> go(grad_out.ptr() + b * co * hw_out, co, hw_out);
    gw.noalias() += go * mc.transpose();
  }
  return gk;
}

#define ROTEQUIV_INSTANTIATE(T)                                                                  \
  template class Tensor<T>;                                                                      \
  template bool bitwise_equal(const Tensor<T>&, const Tensor<T>&);                               \
  template void check_finite(const Tensor<T>&, const std::string&);                              \
  template Tensor<T> rot90(const Tensor<T>&, int, std::pair<int, int>);                          \
  template Tensor<T> roll(const Tensor<T>&, long, int);                                          \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                    \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                                    \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                                    \
  template Tensor<T> scale(const Tensor<T>&, T);                                                 \
  template Tensor<T> silu(const Tensor<T>&);                                                     \
  template Tensor<T> relu(const Tensor<T>&);                                                     \
  template Tensor<T> hard_sigmoid(const Tensor<T>&);                                             \
  template Tensor<T> global_avg_pool(const Tensor<T>&);                                          \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                                 \
  template Tensor<T> transpose(const Tensor<T>&);                                                \
  template Tensor<T> pad2d(const Tensor<T>&, int);                                               \
  template Tensor<T> crop2d(const Tensor<T>&, int);                                              \
  template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const ConvSpec&);                \
  template Tensor<T> conv2d_grad_input(const Tensor<T>&, const Tensor<T>&, const Shape&,         \
                                       const ConvSpec&);                                         \
  template Tensor<T> conv2d_grad_kernel(const Tensor<T>&, const Tensor<T>&, const Shape&,        \
                                        const ConvSpec&);

ROTEQUIV_INSTANTIATE(float)
ROTEQUIV_INSTANTIATE(double)

#undef ROTEQUIV_INSTANTIATE

}  // namespace rotequiv

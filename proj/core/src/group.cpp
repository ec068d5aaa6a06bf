// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#include "rotequiv/group.hpp"

#include <cmath>
#include <numbers>

namespace rotequiv {

CyclicGroup::CyclicGroup(int order) : n_(order) {
  if (order < 1) throw std::invalid_argument("cyclic group order must be >= 1, got " + std::to_string(order));
}

int CyclicGroup::normalize(long g) const noexcept {
  return static_cast<int>(((g % n_) + n_) % n_);
}

double CyclicGroup::angle_deg(int g) const {
  return 360.0 * static_cast<double>(normalize(g)) / static_cast<double>(n_);
}

bool CyclicGroup::is_grid(int g) const noexcept { return (4L * normalize(g)) % n_ == 0; }

int CyclicGroup::quarter_turns(int g) const {
  if (!is_grid(g)) {
    throw std::invalid_argument("element " + std::to_string(g) + " of C" + std::to_string(n_) +
                                " is not a multiple of 90 degrees");
  }
  return static_cast<int>(4L * normalize(g) / n_);
}

int CyclicGroup::element_for_quarter_turns(int q) const {
  if (n_ % 4 != 0) {
    throw std::invalid_argument("C" + std::to_string(n_) + " does not contain the quarter turn");
  }
  return normalize(static_cast<long>(q) * (n_ / 4));
}

template <typename T>
EquivFeature<T>::EquivFeature(Tensor<T> t, CyclicGroup g) : tensor(std::move(t)), group(g) {
  if (tensor.rank() != 4 || tensor.dim(1) % static_cast<std::size_t>(group.order()) != 0) {
    throw ShapeError("regular feature needs NCHW with C divisible by " + std::to_string(group.order()) +
                     ", got " + shape_str(tensor.shape()));
  }
}

// --- kernel rotation -------------------------------------------------------------

KernelRotation::KernelRotation(int k, int quarter_turns, double residual_deg) : k_(k) {
  if (k < 1) throw ShapeError("kernel size must be >= 1");
  const int q = ((quarter_turns % 4) + 4) % 4;
  const double c = (k - 1) / 2.0;
  const double rad = residual_deg * std::numbers::pi / 180.0;
  const double cs = residual_deg == 0.0 ? 1.0 : std::cos(rad);
  const double sn = residual_deg == 0.0 ? 0.0 : std::sin(rad);

  // Bilinear taps of the residual rotation, per pixel.
  std::vector<std::vector<Tap>> residual(static_cast<std::size_t>(k) * k);
  for (int y = 0; y < k; ++y) {
    for (int x = 0; x < k; ++x) {
      const double dx = x - c, dy = y - c;
      const double sx = c + dx * cs + dy * sn;
      const double sy = c - dx * sn + dy * cs;
      const double fx0 = std::floor(sx), fy0 = std::floor(sy);
      const double fx = sx - fx0, fy = sy - fy0;
      const int x0 = static_cast<int>(fx0), y0 = static_cast<int>(fy0);
      auto& taps = residual[static_cast<std::size_t>(y) * k + x];
      const double ws[4] = {(1 - fy) * (1 - fx), (1 - fy) * fx, fy * (1 - fx), fy * fx};
      const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
      const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
      for (int t = 0; t < 4; ++t) {
        if (ws[t] == 0.0 || ys[t] < 0 || ys[t] >= k || xs[t] < 0 || xs[t] >= k) continue;
        taps.push_back({ys[t] * k + xs[t], ws[t]});
      }
    }
  }

  // Compose with q clockwise quarter turns: out[r][c] = in[k-1-c][r].
  taps_.resize(residual.size());
  for (int r = 0; r < k; ++r) {
    for (int col = 0; col < k; ++col) {
      int sr = r, sc = col;
      for (int t = 0; t < q; ++t) {
        const int nr = k - 1 - sc, nc = sr;
        sr = nr;
        sc = nc;
      }
      taps_[static_cast<std::size_t>(r) * k + col] = residual[static_cast<std::size_t>(sr) * k + sc];
    }
  }
}

KernelRotation KernelRotation::for_angle(int k, double angle_deg) {
  double a = std::fmod(angle_deg, 360.0);
  if (a < 0) a += 360.0;
  const double q = std::floor(a / 90.0);
  return KernelRotation(k, static_cast<int>(q), a - 90.0 * q);
}

KernelRotation KernelRotation::for_element(int k, int g, const CyclicGroup& group) {
  const long n = group.order();
  const long e = group.normalize(g);
  const long q = 4 * e / n;
  const long residual_num = 360 * e - 90 * q * n;
  return KernelRotation(k, static_cast<int>(q), static_cast<double>(residual_num) / static_cast<double>(n));
}

template <typename T>
void KernelRotation::apply(const T* in, T* out) const {
  for (std::size_t p = 0; p < taps_.size(); ++p) {
    T acc = 0;
    for (const auto& t : taps_[p]) acc += static_cast<T>(t.w) * in[t.src];
    out[p] = acc;
  }
}

template <typename T>
void KernelRotation::apply_adjoint(const T* out_grad, T* in_grad) const {
  for (std::size_t p = 0; p < taps_.size(); ++p) {
    for (const auto& t : taps_[p]) in_grad[t.src] += static_cast<T>(t.w) * out_grad[p];
  }
}

namespace {

struct KernelDims {
  std::size_t planes, k;
};

KernelDims kernel_dims(const Shape& s, const char* op) {
  if (s.size() < 2 || s[s.size() - 1] != s[s.size() - 2]) {
    throw ShapeError(std::string(op) + ": kernel must be square, got " + shape_str(s));
  }
  const std::size_t k = s.back();
  return {shape_numel(s) / (k * k), k};
}

template <typename T>
Tensor<T> apply_rotation(const Tensor<T>& kernel, const KernelRotation& rot) {
  const auto d = kernel_dims(kernel.shape(), "rotate_kernel");
  Tensor<T> out(kernel.shape());
  const std::size_t kk = d.k * d.k;
  for (std::size_t i = 0; i < d.planes; ++i) rot.apply(kernel.ptr() + i * kk, out.ptr() + i * kk);
  return out;
}

struct ExpandDims {
  std::size_t f, cin, k, n;
};

ExpandDims expand_dims(const Shape& s, const CyclicGroup& group, bool group_input, const char* op) {
  if (s.size() != 4 || s[2] != s[3]) throw ShapeError(std::string(op) + ": expected [F, C, k, k], got " + shape_str(s));
  const auto n = static_cast<std::size_t>(group.order());
  if (group_input && s[1] % n != 0) {
    throw ShapeError(std::string(op) + ": input channels " + std::to_string(s[1]) + " not divisible by N=" +
                     std::to_string(n));
  }
  return {s[0], s[1], s[2], n};
}

std::vector<KernelRotation> rotations_for(std::size_t k, const CyclicGroup& group) {
  std::vector<KernelRotation> rots;
  rots.reserve(static_cast<std::size_t>(group.order()));
  for (int o = 0; o < group.order(); ++o) rots.push_back(KernelRotation::for_element(static_cast<int>(k), o, group));
  return rots;
}

}  // namespace

template <typename T>
Tensor<T> rotate_kernel(const Tensor<T>& kernel, double angle_deg) {
  const auto d = kernel_dims(kernel.shape(), "rotate_kernel");
  return apply_rotation(kernel, KernelRotation::for_angle(static_cast<int>(d.k), angle_deg));
}

template <typename T>
Tensor<T> rotate_kernel(const Tensor<T>& kernel, int g, const CyclicGroup& group) {
  const auto d = kernel_dims(kernel.shape(), "rotate_kernel");
  return apply_rotation(kernel, KernelRotation::for_element(static_cast<int>(d.k), g, group));
}

template <typename T>
Tensor<T> expand_lift(const Tensor<T>& base, const CyclicGroup& group) {
  const auto d = expand_dims(base.shape(), group, false, "expand_lift");
  const auto rots = rotations_for(d.k, group);
  const std::size_t kk = d.k * d.k, block = d.cin * kk;
  Tensor<T> out({d.f * d.n, d.cin, d.k, d.k});
  for (std::size_t f = 0; f < d.f; ++f)
    for (std::size_t o = 0; o < d.n; ++o)
      for (std::size_t c = 0; c < d.cin; ++c) {
        rots[o].apply(base.ptr() + f * block + c * kk, out.ptr() + (f * d.n + o) * block + c * kk);
      }
  return out;
}

template <typename T>
Tensor<T> expand_lift_adjoint(const Tensor<T>& grad, const CyclicGroup& group) {
  const auto n = static_cast<std::size_t>(group.order());
  if (grad.rank() != 4 || grad.dim(0) % n != 0) throw ShapeError("expand_lift_adjoint: bad shape " + shape_str(grad.shape()));
  const ExpandDims d{grad.dim(0) / n, grad.dim(1), grad.dim(2), n};
  const auto rots = rotations_for(d.k, group);
  const std::size_t kk = d.k * d.k, block = d.cin * kk;
  Tensor<T> out({d.f, d.cin, d.k, d.k});
  for (std::size_t f = 0; f < d.f; ++f)
    for (std::size_t o = 0; o < d.n; ++o)
      for (std::size_t c = 0; c < d.cin; ++c) {
        rots[o].apply_adjoint(grad.ptr() + (f * d.n + o) * block + c * kk, out.ptr() + f * block + c * kk);
      }
  return out;
}

template <typename T>
Tensor<T> expand_group(const Tensor<T>& base, const CyclicGroup& group) {
  const auto d = expand_dims(base.shape(), group, true, "expand_group");
  const auto rots = rotations_for(d.k, group);
  const std::size_t kk = d.k * d.k, block = d.cin * kk, fin = d.cin / d.n;
  Tensor<T> out({d.f * d.n, d.cin, d.k, d.k});
  for (std::size_t f = 0; f < d.f; ++f)
    for (std::size_t o = 0; o < d.n; ++o)
      for (std::size_t fi = 0; fi < fin; ++fi)
        for (std::size_t i = 0; i < d.n; ++i) {
          const std::size_t src = fi * d.n + (i + d.n - o) % d.n;
          rots[o].apply(base.ptr() + f * block + src * kk, out.ptr() + (f * d.n + o) * block + (fi * d.n + i) * kk);
        }
  return out;
}

template <typename T>
Tensor<T> expand_group_adjoint(const Tensor<T>& grad, const CyclicGroup& group) {
  const auto n = static_cast<std::size_t>(group.order());
  if (grad.rank() != 4 || grad.dim(0) % n != 0 || grad.dim(1) % n != 0) {
    throw ShapeError("expand_group_adjoint: bad shape " + shape_str(grad.shape()));
  }
  const ExpandDims d{grad.dim(0) / n, grad.dim(1), grad.dim(2), n};
  const auto rots = rotations_for(d.k, group);
  const std::size_t kk = d.k * d.k, block = d.cin * kk, fin = d.cin / d.n;
  Tensor<T> out({d.f, d.cin, d.k, d.k});
  for (std::size_t f = 0; f < d.f; ++f)
    for (std::size_t o = 0; o < d.n; ++o)
      for (std::size_t fi = 0; fi < fin; ++fi)
        for (std::size_t i = 0; i < d.n; ++i) {
          const std::size_t src = fi * d.n + (i + d.n - o) % d.n;
          rots[o].apply_adjoint(grad.ptr() + (f * d.n + o) * block + (fi * d.n + i) * kk,
                                out.ptr() + f * block + src * kk);
        }
  return out;
}

// --- actions on features --------------------------------------------------------

template <typename T>
Tensor<T> regular_act(const Tensor<T>& x, int g, const CyclicGroup& group) {
  if (x.rank() != 4) throw ShapeError("regular_act: expected NCHW, got " + shape_str(x.shape()));
  const auto n = static_cast<std::size_t>(group.order());
  if (x.dim(1) % n != 0) {
    throw ShapeError("regular_act: channels " + std::to_string(x.dim(1)) + " not divisible by N=" + std::to_string(n));
  }
  const int q = group.quarter_turns(g);
  const Shape s = x.shape();
  Tensor<T> y = x.reshaped({s[0], s[1] / n, n, s[2], s[3]});
  y = roll(y, group.normalize(g), 2);
  y = rot90(y, q, {3, 4});
  return y.reshaped(s);
}

template <typename T>
EquivFeature<T> regular_act(const EquivFeature<T>& x, int g) {
  return EquivFeature<T>(regular_act(x.tensor, g, x.group), x.group);
}

template <typename T>
Tensor<T> grid_act(const Tensor<T>& x, int quarter_turns, const CyclicGroup& group) {
  if (group.order() == 1) return rot90(x, quarter_turns);
  return regular_act(x, group.element_for_quarter_turns(quarter_turns), group);
}

// --- differentiable wrappers ------------------------------------------------------

template <typename T>
ad::Var<T> rotate_kernel(const ad::Var<T>& kernel, int g, const CyclicGroup& group) {
  const auto d = kernel_dims(kernel.shape(), "rotate_kernel");
  auto rot = std::make_shared<KernelRotation>(KernelRotation::for_element(static_cast<int>(d.k), g, group));
  return ad::make_op<T>(apply_rotation(kernel.value(), *rot), {kernel},
                        [rot, d](const Tensor<T>& grad, std::span<const ad::NodePtr<T>> p) {
                          Tensor<T> gk(p[0]->value.shape());
                          const std::size_t kk = d.k * d.k;
                          for (std::size_t i = 0; i < d.planes; ++i) {
                            rot->apply_adjoint(grad.ptr() + i * kk, gk.ptr() + i * kk);
                          }
                          p[0]->accumulate(std::move(gk));
                        });
}

template <typename T>
ad::Var<T> expand_lift(const ad::Var<T>& base, const CyclicGroup& group) {
  return ad::make_op<T>(expand_lift(base.value(), group), {base},
                        [group](const Tensor<T>& grad, std::span<const ad::NodePtr<T>> p) {
                          p[0]->accumulate(expand_lift_adjoint(grad, group));
                        });
}

template <typename T>
ad::Var<T> expand_group(const ad::Var<T>& base, const CyclicGroup& group) {
  return ad::make_op<T>(expand_group(base.value(), group), {base},
                        [group](const Tensor<T>& grad, std::span<const ad::NodePtr<T>> p) {
                          p[0]->accumulate(expand_group_adjoint(grad, group));
                        });
}

#define ROTEQUIV_GROUP_INSTANTIATE(T)                                                        \
  template struct EquivFeature<T>;                                                           \
  template void KernelRotation::apply(const T*, T*) const;                                   \
  template void KernelRotation::apply_adjoint(const T*, T*) const;                           \
  template Tensor<T> rotate_kernel(const Tensor<T>&, double);                                \
  template Tensor<T> rotate_kernel(const Tensor<T>&, int, const CyclicGroup&);               \
  template Tensor<T> expand_lift(const Tensor<T>&, const CyclicGroup&);                      \
  template Tensor<T> expand_group(const Tensor<T>&, const CyclicGroup&);                     \
  template Tensor<T> expand_lift_adjoint(const Tensor<T>&, const CyclicGroup&);              \
  template Tensor<T> expand_group_adjoint(const Tensor<T>&, const CyclicGroup&);             \
  template Tensor<T> regular_act(const Tensor<T>&, int, const CyclicGroup&);                 \
  template EquivFeature<T> regular_act(const EquivFeature<T>&, int);                         \
  template Tensor<T> grid_act(const Tensor<T>&, int, const CyclicGroup&);                    \
  template ad::Var<T> rotate_kernel(const ad::Var<T>&, int, const CyclicGroup&);             \
  template ad::Var<T> expand_lift(const ad::Var<T>&, const CyclicGroup&);                    \
  template ad::Var<T> expand_group(const ad::Var<T>&, const CyclicGroup&);

ROTEQUIV_GROUP_INSTANTIATE(float)
ROTEQUIV_GROUP_INSTANTIATE(double)

#undef ROTEQUIV_GROUP_INSTANTIATE

}  // namespace rotequiv

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#pragma once

#include <cstddef>
#include <vector>

#include "rotequiv/autodiff.hpp"
#include "rotequiv/tensor.hpp"

namespace rotequiv {

/// The cyclic rotation group C_N. Element g is the clockwise rotation by
/// g * 360 / N degrees.
class CyclicGroup {
 public:
  explicit CyclicGroup(int order = 8);

  int order() const noexcept { return n_; }
  int normalize(long g) const noexcept;
  double angle_deg(int g) const;

  /// True when g's angle is a multiple of 90 degrees.
  bool is_grid(int g) const noexcept;
  int quarter_turns(int g) const;

  /// True when every quarter turn is representable on features (4 | N), or
  /// the group is trivial and features carry no orientation axis.
  bool supports_quarter_turns() const noexcept { return n_ == 1 || n_ % 4 == 0; }

  /// Element for q clockwise quarter turns. Requires 4 | N.
  int element_for_quarter_turns(int q) const;

  friend bool operator==(const CyclicGroup&, const CyclicGroup&) = default;

 private:
  int n_;
};

/// Regular-representation feature: channel c = f * N + o carries field f at
/// orientation o.
template <typename T>
struct EquivFeature {
  Tensor<T> tensor;  // NCHW
  CyclicGroup group;

  EquivFeature(Tensor<T> t, CyclicGroup g);
  std::size_t fields() const { return tensor.dim(1) / static_cast<std::size_t>(group.order()); }
};

/// Resampling table that rotates a k x k kernel clockwise by
/// quarter_turns * 90 + residual_deg. The residual part is bilinear about the
/// kernel centre with zero fill; the quarter turns are exact permutations
/// applied afterwards, so appending a quarter turn to the table's output
/// reproduces the table for the angle + 90 bit for bit.
class KernelRotation {
 public:
  KernelRotation(int k, int quarter_turns, double residual_deg);
  static KernelRotation for_angle(int k, double angle_deg);
  static KernelRotation for_element(int k, int g, const CyclicGroup& group);

  int size() const noexcept { return k_; }

  /// out[p] = sum of w * in[src] over the taps of p; planes are k*k each.
  template <typename T>
  void apply(const T* in, T* out) const;
  /// Adjoint: in_grad[src] += w * out_grad[p].
  template <typename T>
  void apply_adjoint(const T* out_grad, T* in_grad) const;

 private:
  struct Tap {
    int src;
    double w;
  };
  int k_;
  std::vector<std::vector<Tap>> taps_;  // per output pixel
};

/// Rotates every k x k plane of `kernel` (last two axes, must be square).
template <typename T>
Tensor<T> rotate_kernel(const Tensor<T>& kernel, double angle_deg);
template <typename T>
Tensor<T> rotate_kernel(const Tensor<T>& kernel, int g, const CyclicGroup& group);

/// [F, C, k, k] -> [F*N, C, k, k]; output channel f*N + o is base[f] rotated
/// by element o.
template <typename T>
Tensor<T> expand_lift(const Tensor<T>& base, const CyclicGroup& group);

/// [F, Fi*N, k, k] -> [F*N, Fi*N, k, k]; the orientation-o slice is base[f]
/// with its input orientation axis rolled by +o, then spatially rotated by
/// element o.
template <typename T>
Tensor<T> expand_group(const Tensor<T>& base, const CyclicGroup& group);

template <typename T>
Tensor<T> expand_lift_adjoint(const Tensor<T>& grad, const CyclicGroup& group);
template <typename T>
Tensor<T> expand_group_adjoint(const Tensor<T>& grad, const CyclicGroup& group);

/// Action of element g on a regular feature: every field's orientation axis
/// rolls by +g and the plane turns g * 4 / N quarter turns clockwise.
/// Requires g to be a grid rotation.
template <typename T>
Tensor<T> regular_act(const Tensor<T>& x, int g, const CyclicGroup& group);
template <typename T>
EquivFeature<T> regular_act(const EquivFeature<T>& x, int g);

/// Action of q clockwise quarter turns on features of `group`. For the
/// trivial group this is a plain spatial rotation.
template <typename T>
Tensor<T> grid_act(const Tensor<T>& x, int quarter_turns, const CyclicGroup& group);

/// Differentiable counterparts; gradients reach only the base kernels.
template <typename T>
ad::Var<T> rotate_kernel(const ad::Var<T>& kernel, int g, const CyclicGroup& group);
template <typename T>
ad::Var<T> expand_lift(const ad::Var<T>& base, const CyclicGroup& group);
template <typename T>
ad::Var<T> expand_group(const ad::Var<T>& base, const CyclicGroup& group);

}  // namespace rotequiv

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "rotequiv/conv_spec.hpp"
#include "rotequiv/rng.hpp"

namespace rotequiv {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense row-major tensor. Float is used for training and inference, double
/// for finite-difference oracles.
template <typename T>
class Tensor {
  static_assert(std::is_floating_point_v<T>);

 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T(0));
  Tensor(Shape shape, std::vector<T> data);

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor full(Shape shape, T value) { return Tensor(std::move(shape), value); }
  static Tensor scalar(T value) { return Tensor(Shape{1}, value); }
  static Tensor randn(Shape shape, Rng& rng, T stddev = T(1));
  static Tensor uniform(Shape shape, Rng& rng, T lo, T hi);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  T* ptr() noexcept { return data_.data(); }
  const T* ptr() const noexcept { return data_.data(); }
  std::vector<T>& storage() noexcept { return data_; }
  const std::vector<T>& storage() const noexcept { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  /// Flat offset of a full multi-index (bounds checked).
  std::size_t offset(std::initializer_list<std::size_t> index) const;
  T& at(std::initializer_list<std::size_t> index) { return data_[offset(index)]; }
  const T& at(std::initializer_list<std::size_t> index) const { return data_[offset(index)]; }

  /// The single value of a one-element tensor.
  T item() const;

  Tensor reshaped(Shape shape) const;

  template <typename U>
  Tensor<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return Tensor<U>(shape_, std::move(out));
  }

  bool all_finite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<T> data_;
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

/// Same shape and identical bit patterns.
template <typename T>
bool bitwise_equal(const Tensor<T>& a, const Tensor<T>& b);

/// Throws NumericError naming `context` when any value is NaN or Inf.
template <typename T>
void check_finite(const Tensor<T>& t, const std::string& context);

// --- geometric primitives -------------------------------------------------

/// Quarter-turn rotation in the plane of (row_axis, col_axis). Positive turns
/// are clockwise when rows grow downward: [[1,2],[3,4]] -> [[3,1],[4,2]].
template <typename T>
Tensor<T> rot90(const Tensor<T>& t, int quarter_turns, std::pair<int, int> axes);

/// rot90 over the last two axes.
template <typename T>
Tensor<T> rot90(const Tensor<T>& t, int quarter_turns) {
  const int r = static_cast<int>(t.rank());
  return rot90(t, quarter_turns, {r - 2, r - 1});
}

/// Cyclic shift: out[i] = in[(i - shift) mod n] along `axis`.
template <typename T>
Tensor<T> roll(const Tensor<T>& t, long shift, int axis);

// --- elementwise and reductions --------------------------------------------

template <typename T> Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> scale(const Tensor<T>& a, T factor);
template <typename T> Tensor<T> silu(const Tensor<T>& a);
template <typename T> Tensor<T> relu(const Tensor<T>& a);
template <typename T> Tensor<T> hard_sigmoid(const Tensor<T>& a);

/// Per-(sample, channel) spatial mean of an NCHW tensor -> [N, C].
template <typename T> Tensor<T> global_avg_pool(const Tensor<T>& x);

/// [m, k] x [k, n] -> [m, n].
template <typename T> Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);

/// Transpose of a rank-2 tensor.
template <typename T> Tensor<T> transpose(const Tensor<T>& a);

/// Zero padding of the last two axes by `pad` on every side.
template <typename T> Tensor<T> pad2d(const Tensor<T>& x, int pad);

/// Inverse of pad2d: drops `pad` from every side of the last two axes.
template <typename T> Tensor<T> crop2d(const Tensor<T>& x, int pad);

// --- convolution ----------------------------------------------------------

/// Cross-correlation of x [N, I, H, W] with kernel [O, I, k, k]; zero padding.
/// Implemented as patch gather + GEMM; every output element has a fixed
/// reduction order.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& kernel, const ConvSpec& spec);

/// d(loss)/d(x) given d(loss)/d(conv2d(x, kernel)).
template <typename T>
Tensor<T> conv2d_grad_input(const Tensor<T>& grad_out, const Tensor<T>& kernel,
                            const Shape& input_shape, const ConvSpec& spec);

/// d(loss)/d(kernel) given d(loss)/d(conv2d(x, kernel)).
template <typename T>
Tensor<T> conv2d_grad_kernel(const Tensor<T>& x, const Tensor<T>& grad_out,
                             const Shape& kernel_shape, const ConvSpec& spec);

}  // namespace rotequiv

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "rotequiv/tensor.hpp"

namespace rotequiv::ad {

template <typename T>
struct Node;

template <typename T>
using NodePtr = std::shared_ptr<Node<T>>;

/// Receives the gradient flowing into a node and pushes contributions to its
/// parents with Node::accumulate.
template <typename T>
using BackwardFn = std::function<void(const Tensor<T>& grad_out, std::span<const NodePtr<T>> parents)>;

template <typename T>
struct Node {
  Tensor<T> value;
  Tensor<T> grad;  // empty until something flows in
  std::vector<NodePtr<T>> parents;
  BackwardFn<T> backward;
  bool requires_grad = false;

  /// grad += g, allocating on first use. No-op when requires_grad is false.
  void accumulate(const Tensor<T>& g);
  void accumulate(Tensor<T>&& g);
};

/// Handle to a graph node. Copies share the node.
template <typename T>
class Var {
 public:
  Var() = default;
  explicit Var(Tensor<T> value, bool requires_grad = false);
  explicit Var(NodePtr<T> node) : node_(std::move(node)) {}

  /// Leaf that receives gradients.
  static Var parameter(Tensor<T> value) { return Var(std::move(value), true); }

  bool defined() const noexcept { return node_ != nullptr; }
  const Tensor<T>& value() const { return node_->value; }
  Tensor<T>& mutable_value() { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  bool requires_grad() const { return node_ && node_->requires_grad; }

  /// Accumulated gradient; zeros if nothing has reached this node.
  const Tensor<T>& grad() const;
  void zero_grad();

  const NodePtr<T>& node() const noexcept { return node_; }

 private:
  NodePtr<T> node_;
};

/// Builds an interior node. Without grad mode, or when no parent needs a
/// gradient, the result is a constant leaf and `fn` is dropped.
template <typename T>
Var<T> make_op(Tensor<T> value, std::vector<Var<T>> parents, BackwardFn<T> fn);

/// Reverse sweep from a one-element loss. Gradients accumulate into every
/// node that requires them.
template <typename T>
void backward(const Var<T>& loss);

bool grad_enabled() noexcept;

/// Disables graph recording on this thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

// --- differentiable operations ----------------------------------------------

template <typename T> Var<T> add(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> sub(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> mul(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> scale(const Var<T>& a, T factor);
template <typename T> Var<T> silu(const Var<T>& a);
template <typename T> Var<T> relu(const Var<T>& a);
template <typename T> Var<T> hard_sigmoid(const Var<T>& a);

/// Sum / mean of all elements -> shape [1].
template <typename T> Var<T> sum(const Var<T>& a);
template <typename T> Var<T> mean(const Var<T>& a);

template <typename T> Var<T> reshape(const Var<T>& a, Shape shape);
template <typename T> Var<T> matmul(const Var<T>& a, const Var<T>& b);

/// x [B, C] -> x W^T + b with W [O, C], b [O].
template <typename T> Var<T> linear(const Var<T>& x, const Var<T>& w, const Var<T>& b);

template <typename T> Var<T> conv2d(const Var<T>& x, const Var<T>& kernel, const ConvSpec& spec);

/// x [B, C, ...] + b[c] broadcast over batch and trailing axes.
template <typename T> Var<T> add_channel_bias(const Var<T>& x, const Var<T>& bias);

/// x [B, C, H, W] * s[b, c] broadcast over H, W.
template <typename T> Var<T> channel_scale(const Var<T>& x, const Var<T>& s);

template <typename T> Var<T> global_avg_pool(const Var<T>& x);
template <typename T> Var<T> pad2d(const Var<T>& x, int pad);

/// Repeats every entry of the last axis `repeats` times consecutively:
/// [a, b] -> [a, a, b, b].
template <typename T> Var<T> repeat_interleave(const Var<T>& a, std::size_t repeats);

/// Channels [start, start + count) of axis 1.
template <typename T> Var<T> channel_slice(const Var<T>& x, std::size_t start, std::size_t count);

/// Concatenation along axis 1.
template <typename T> Var<T> channel_concat(std::span<const Var<T>> parts);

/// out channel i = in channel perm[i] along axis 1.
template <typename T> Var<T> channel_permute(const Var<T>& x, std::span<const std::size_t> perm);

/// Mean over consecutive groups of the last axis: [..., K*g] -> [..., K].
/// Each group is summed in ascending value order, so the result does not
/// depend on how the group's members are permuted.
template <typename T> Var<T> group_mean(const Var<T>& a, std::size_t group_size);

/// Mean softmax cross-entropy of logits [B, K] against integer labels.
template <typename T> Var<T> cross_entropy(const Var<T>& logits, std::span<const int> labels);

}  // namespace rotequiv::ad

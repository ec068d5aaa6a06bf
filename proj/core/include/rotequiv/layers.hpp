// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "rotequiv/autodiff.hpp"
#include "rotequiv/group.hpp"
#include "rotequiv/optim.hpp"
#include "rotequiv/rng.hpp"

namespace rotequiv::nn {

using ad::NamedParam;
using ad::Var;

template <typename T>
struct NamedBuffer {
  std::string name;
  Tensor<T>* tensor;
};

/// Parameters and non-learned state of a module tree.
template <typename T>
struct Registry {
  std::vector<NamedParam<T>> params;
  std::vector<NamedBuffer<T>> buffers;

  std::size_t param_count() const;
};

enum class DownsampleMode { strict, approx };
enum class PoolKind { max, mean };
enum class ConvKind { lift, group };

/// Statistics layout of EquivBatchNorm. per_channel is the non-equivariant
/// ablation: every channel gets its own statistics and affine pair.
enum class NormLayout { per_field, per_channel };

std::string to_string(DownsampleMode mode);
DownsampleMode parse_downsample_mode(const std::string& text);

/// Lift or group convolution with one learnable base kernel per output field
/// and one bias per field shared across orientations.
template <typename T>
class EquivConv {
 public:
  /// For lift, `in` counts plain input channels; for group, input fields.
  EquivConv(ConvKind kind, std::size_t in, std::size_t out_fields, ConvSpec spec, CyclicGroup group, Rng& rng);

  Var<T> forward(const Var<T>& x) const;
  /// The kernel bank actually convolved with the input.
  Var<T> expanded_kernel() const;

  void collect(const std::string& prefix, Registry<T>& reg);
  std::size_t param_count() const { return weight_.value().numel() + bias_.value().numel(); }

  ConvKind kind() const { return kind_; }
  const ConvSpec& spec() const { return spec_; }
  std::size_t in_channels() const;
  std::size_t out_channels() const { return out_fields_ * static_cast<std::size_t>(group_.order()); }
  Var<T>& weight() { return weight_; }
  Var<T>& bias() { return bias_; }

 private:
  ConvKind kind_;
  std::size_t in_, out_fields_;
  ConvSpec spec_;
  CyclicGroup group_;
  Var<T> weight_, bias_;
};

/// Batch normalization whose statistics pool each field over batch,
/// orientation and space, with a per-field affine shared by all orientations.
template <typename T>
class EquivBatchNorm {
 public:
  EquivBatchNorm(std::size_t channels, CyclicGroup group, NormLayout layout = NormLayout::per_field);

  Var<T> forward(const Var<T>& x, bool training);

  void collect(const std::string& prefix, Registry<T>& reg);
  std::size_t param_count() const { return gamma_.value().numel() + beta_.value().numel(); }

  Var<T>& gamma() { return gamma_; }
  Var<T>& beta() { return beta_; }
  const Tensor<T>& running_mean() const { return running_mean_; }
  const Tensor<T>& running_var() const { return running_var_; }

  static constexpr double kEps = 1e-5;
  static constexpr double kMomentum = 0.1;

 private:
  std::size_t channels_;
  CyclicGroup group_;
  NormLayout layout_;
  Var<T> gamma_, beta_;
  Tensor<T> running_mean_, running_var_;
};

/// conv -> batch norm -> SiLU.
template <typename T>
class ConvModule {
 public:
  ConvModule(ConvKind kind, std::size_t in, std::size_t out_fields, ConvSpec spec, CyclicGroup group, Rng& rng,
             NormLayout layout = NormLayout::per_field);

  Var<T> forward(const Var<T>& x, bool training);
  void collect(const std::string& prefix, Registry<T>& reg);
  std::size_t param_count() const { return conv_.param_count() + norm_.param_count(); }

  EquivConv<T>& conv() { return conv_; }
  const EquivConv<T>& conv() const { return conv_; }
  EquivBatchNorm<T>& norm() { return norm_; }

 private:
  EquivConv<T> conv_;
  EquivBatchNorm<T> norm_;
};

/// Stride-2 reduction. In strict mode a k=4, p=1, s=1 tuning conv turns an
/// even incoming extent 2n into 2n-1 first, so the k=3, p=1, s=2 conv always
/// sees an odd extent and both modes produce n.
template <typename T>
class DownsampleBlock {
 public:
  DownsampleBlock(DownsampleMode mode, std::size_t in_fields, std::size_t out_fields, int in_extent,
                  CyclicGroup group, Rng& rng);

  Var<T> forward(const Var<T>& x, bool training);
  void collect(const std::string& prefix, Registry<T>& reg);
  std::size_t param_count() const;

  DownsampleMode mode() const { return mode_; }
  bool has_tuning() const { return tuning_.has_value(); }
  int in_extent() const { return in_extent_; }
  int out_extent() const;

 private:
  DownsampleMode mode_;
  int in_extent_;
  std::optional<ConvModule<T>> tuning_;
  ConvModule<T> down_;
};

/// Channel attention producing one gate per field. The squeezed vector is
/// averaged over each field's orientations before the excitation, so the
/// gates are unchanged by orientation rolls. The naive variant gates every
/// channel independently from the raw squeeze.
template <typename T>
class ChannelAttention {
 public:
  ChannelAttention(std::size_t channels, CyclicGroup group, Rng& rng, bool naive = false);

  Var<T> forward(const Var<T>& x) const;
  /// Gate per channel, s' in [B, C].
  Var<T> gates(const Var<T>& x) const;

  void collect(const std::string& prefix, Registry<T>& reg);
  std::size_t param_count() const { return weight_.value().numel() + bias_.value().numel(); }
  bool naive() const { return naive_; }

  Var<T>& weight() { return weight_; }
  Var<T>& bias() { return bias_; }

 private:
  std::size_t channels_;
  CyclicGroup group_;
  bool naive_;
  Var<T> weight_, bias_;
};

/// Reduces the orientation axis: [B, F*N, H, W] -> [B, F, H, W]. The mean
/// sums each orientation fibre in ascending value order.
template <typename T>
Var<T> orientation_pool(const Var<T>& x, const CyclicGroup& group, PoolKind kind);

/// Group o holds channels {c : c mod N == o} in their original order.
template <typename T>
std::vector<Var<T>> rearrange_by_orientation(const Var<T>& x, const CyclicGroup& group);
template <typename T>
Var<T> merge_orientation_groups(std::span<const Var<T>> groups, const CyclicGroup& group);

/// Soft-argmax over per-orientation scores r [B, N]: the circular mean of the
/// orientation angles o * 2pi / N weighted by softmax(r), in radians [B].
template <typename T>
Var<T> orientation_angle(const Var<T>& scores, const CyclicGroup& group);

/// mean(1 - cos(m_i * (pred_i - target_i))), angles in radians.
template <typename T>
Var<T> angular_loss(const Var<T>& pred, std::span<const T> target, std::span<const int> multiplicity);

/// One head branch module applied to all N orientation groups with a single
/// base kernel, rotated for each group: group o is convolved with the base
/// rotated by element o. Followed by batch norm and SiLU on the merged
/// feature.
template <typename T>
class BranchModule {
 public:
  BranchModule(std::size_t in_fields, std::size_t hidden, CyclicGroup group, Rng& rng, int k = 3);

  Var<T> forward(const Var<T>& x, bool training);
  void collect(const std::string& prefix, Registry<T>& reg);
  std::size_t param_count() const;
  const ConvSpec& spec() const { return spec_; }

 private:
  CyclicGroup group_;
  ConvSpec spec_;
  Var<T> weight_, bias_;
  EquivBatchNorm<T> norm_;
};

}  // namespace rotequiv::nn

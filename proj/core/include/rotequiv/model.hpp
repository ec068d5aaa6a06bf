// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rotequiv/config.hpp"
#include "rotequiv/layers.hpp"

namespace rotequiv::nn {

template <typename T>
struct ModelOutput {
  Var<T> class_logits;        // [B, K], orientation-invariant
  Var<T> angle;               // [B], radians, clockwise
  Var<T> orientation_scores;  // [B, N]
  /// Named intermediate features: "S0".."S<n>" and "head".
  std::vector<std::pair<std::string, Var<T>>> taps;
};

struct ParamCounts {
  std::map<std::string, std::size_t> per_module;  // "stem", "stage1", ..., "head"
  std::size_t total = 0;
};

/// Backbone (lifting stem, downsampling stages with optional attention) and
/// the multi-branch head with class and orientation readouts.
template <typename T>
class Model {
 public:
  Model(const NetworkConfig& config, Rng& rng);

  ModelOutput<T> forward(const Var<T>& images, bool training);

  /// Parameters and buffers with stable dotted names.
  Registry<T> registry();
  ParamCounts param_counts() const;

  const NetworkConfig& config() const { return config_; }
  const CyclicGroup& group() const { return group_; }
  std::vector<std::string> tap_names() const;

 private:
  struct Stage {
    DownsampleBlock<T> down;
    std::vector<ConvModule<T>> blocks;
    std::optional<ChannelAttention<T>> attention;
  };

  NetworkConfig config_;
  CyclicGroup group_;
  std::optional<ConvModule<T>> stem_conv_;
  std::optional<DownsampleBlock<T>> stem_down_;
  std::vector<Stage> stages_;
  std::vector<BranchModule<T>> branches_;
  std::optional<EquivConv<T>> aggregate_;
};

/// Closed-form parameter count of the multi-branch head on C input channels.
std::size_t head_param_count(std::size_t in_channels, int orientations, int branch_modules, int hidden, int num_classes);

/// Same module count and aggregation, but every module is one ordinary
/// convolution of width hidden * N over all input channels.
std::size_t single_branch_head_param_count(std::size_t in_channels, int orientations, int branch_modules, int hidden,
                                           int num_classes);

/// Parameter count of the channel attention excitation on C channels.
std::size_t attention_param_count(std::size_t channels, int orientations, bool naive);

}  // namespace rotequiv::nn

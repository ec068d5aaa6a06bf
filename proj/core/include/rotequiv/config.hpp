// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rotequiv/conv_spec.hpp"
#include "rotequiv/layers.hpp"

namespace rotequiv::nn {

/// Parse or validation failure. line() is 1-based, or 0 when the problem is
/// not tied to a line of a config file.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, int line = 0);
  /// Error located in a file: what() reads "<file>:<line>: <message>".
  ConfigError(const std::string& file, const std::string& message, int line);
  int line() const noexcept { return line_; }
  /// The message without the line prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  int line_;
  std::string message_;
};

struct StemConfig {
  int channels = 16;
  DownsampleMode downsample_mode = DownsampleMode::strict;
  friend bool operator==(const StemConfig&, const StemConfig&) = default;
};

struct StageConfig {
  int channels = 32;
  int num_blocks = 1;
  DownsampleMode downsample_mode = DownsampleMode::strict;
  bool attention = true;
  friend bool operator==(const StageConfig&, const StageConfig&) = default;
};

struct HeadConfig {
  int branch_modules = 3;
  int hidden_channels = 16;  // per orientation group
  friend bool operator==(const HeadConfig&, const HeadConfig&) = default;
};

struct TaskConfig {
  int num_classes = 4;
  friend bool operator==(const TaskConfig&, const TaskConfig&) = default;
};

/// Channel counts of the stem and stages are totals (fields * N).
struct NetworkConfig {
  int orientations = 8;
  int input_size = 64;
  int input_channels = 1;
  StemConfig stem;
  std::vector<StageConfig> stages;
  HeadConfig head;
  TaskConfig task;

  /// Stem 16, four stages (32, 64, 96, 128) of one block each, attention on,
  /// strict everywhere, three head modules, N = 8, 64 x 64 input.
  static NetworkConfig defaults();

  /// Throws ConfigError naming the offending field.
  void validate() const;

  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

NetworkConfig parse_config(std::string_view text);
NetworkConfig load_config(const std::filesystem::path& path);
std::string serialize(const NetworkConfig& config);

/// Applies "section.key=value", e.g. "stage.2.channels=64" or
/// "network.orientations=4".
void apply_override(NetworkConfig& config, std::string_view assignment);

/// Sets the stem's and every stage's downsampling mode.
void set_downsample_mode(NetworkConfig& config, DownsampleMode mode);

enum class LayerRole { lift, tuning, down, block, branch, aggregate };

/// One convolution of the network as planned from a config.
struct PlannedConv {
  std::string name;
  std::string stage;  // "S0".."S<n>" or "head"
  LayerRole role;
  ConvSpec spec;
  int in_extent;
  int out_extent;
  friend bool operator==(const PlannedConv&, const PlannedConv&) = default;
};

/// Every convolution in forward order with propagated extents. Throws
/// ConfigError when an extent collapses.
std::vector<PlannedConv> plan_convs(const NetworkConfig& config);

}  // namespace rotequiv::nn

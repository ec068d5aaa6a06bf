// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rotequiv/config.hpp"

namespace rotequiv::harness {

struct StrictnessRow {
  int layer;  // position in forward order
  std::string name;
  int padded_in;  // i = S_in + 2p
  int k;
  int s;
  int residue;  // (i - k) mod s
  bool pass;
  friend bool operator==(const StrictnessRow&, const StrictnessRow&) = default;
};

struct StrictnessReport {
  int input_size = 0;
  std::vector<StrictnessRow> rows;
  bool strict = true;

  /// Index into rows of the first failing layer.
  std::optional<std::size_t> first_violation() const;
};

/// Static check of every convolution of `config` at `input_size`: extents are
/// propagated with the output-size formula and each layer passes when
/// (i - k) mod s == 0 on its padded input extent i. Stride-1 layers pass
/// trivially.
StrictnessReport check_strictness(const nn::NetworkConfig& config, int input_size);

}  // namespace rotequiv::harness

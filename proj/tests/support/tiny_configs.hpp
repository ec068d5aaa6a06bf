// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#pragma once

#include "rotequiv/config.hpp"

namespace rotequiv::testing {

/// Small network that still has a stem, two stages and the head.
inline nn::NetworkConfig small_config(int orientations = 4, int input_size = 16,
                                      nn::DownsampleMode mode = nn::DownsampleMode::strict) {
  nn::NetworkConfig c;
  c.orientations = orientations;
  c.input_size = input_size;
  c.stem.channels = 2 * orientations;
  c.stem.downsample_mode = mode;
  c.stages = {nn::StageConfig{2 * orientations, 1, mode, true}, nn::StageConfig{4 * orientations, 1, mode, true}};
  c.head = {3, 2};
  c.task.num_classes = 4;
  c.validate();
  return c;
}

}  // namespace rotequiv::testing

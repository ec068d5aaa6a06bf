// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#pragma once

#include <string>

namespace rotequiv {

/// Square-kernel convolution geometry. Dilation is carried for completeness
/// of the size formula but only d == 1 is executable.
struct ConvSpec {
  int k = 3;  // kernel size
  int p = 0;  // zero padding on every side
  int s = 1;  // stride
  int d = 1;  // dilation

  friend bool operator==(const ConvSpec&, const ConvSpec&) = default;
};

/// Output extent of a convolution:
///   S_out = floor((S_in + 2p - d(k-1) - 1) / s) + 1
/// Throws ShapeError when the result is not positive or the spec is invalid.
int out_size(const ConvSpec& spec, int s_in);

/// Residue of the sampling-lattice condition (i - k) mod s evaluated on the
/// padded extent i = s_in + 2p. Zero means a quarter-turn of the input maps
/// the sampled lattice onto itself.
int lattice_residue(const ConvSpec& spec, int s_in);

std::string to_string(const ConvSpec& spec);

/// Tuning layer that turns an even extent 2n into 2n - 1.
inline constexpr ConvSpec kTuningSpec{4, 1, 1, 1};
/// 2x downsampling convolution.
inline constexpr ConvSpec kDownSpec{3, 1, 2, 1};

}  // namespace rotequiv

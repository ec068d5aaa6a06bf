// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#pragma once

#include <span>
#include <vector>

#include "rotequiv/harness/dataset.hpp"
#include "rotequiv/model.hpp"

namespace rotequiv::harness {

struct RobustnessRow {
  double angle_deg;
  double accuracy;
  double mean_angular_error_deg;
  friend bool operator==(const RobustnessRow&, const RobustnessRow&) = default;
};

using RobustnessCurve = std::vector<RobustnessRow>;

/// Rotates NCHW images clockwise about their centre. Multiples of 90 degrees
/// are exact rot90 permutations; other angles use bilinear interpolation with
/// zero fill, keeping the original size.
TensorF rotate_images(const TensorF& images, double angle_deg);

/// Class accuracy and mean orientation error of `model` on `test` rotated by
/// each angle; the target orientation is shifted by the same angle.
RobustnessCurve robustness_sweep(nn::Model<float>& model, const Split& test, std::span<const double> angles_deg,
                                 int batch = 50);

}  // namespace rotequiv::harness

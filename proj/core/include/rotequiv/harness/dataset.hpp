// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rotequiv/rng.hpp"
#include "rotequiv/tensor.hpp"

namespace rotequiv::harness {

enum class ShapeKind { bar = 0, ellipse = 1, triangle = 2, lshape = 3 };
inline constexpr int kNumShapeKinds = 4;

std::string to_string(ShapeKind kind);

/// Order of the shape's rotational symmetry: rotating by 360/m degrees maps
/// it onto itself, so its orientation is only defined modulo 360/m.
int symmetry_order(ShapeKind kind);

struct DatasetSpec {
  int n_train = 2000;
  int n_test = 500;
  int image_size = 64;
  std::uint64_t seed = 0;
  double noise_std = 0.05;
  /// Orientations are drawn uniformly from [0, angle_range_deg).
  double angle_range_deg = 360.0;
  double center_jitter = 2.0;  // pixels, uniform in [-j, j] per axis
  double min_scale = 0.8;      // shape size factor drawn from [min_scale, 1]

  void validate() const;
};

struct RenderParams {
  ShapeKind kind = ShapeKind::bar;
  double theta_deg = 0.0;  // clockwise in image coordinates
  double dx = 0.0;         // centre offset, pixels
  double dy = 0.0;
  double scale = 1.0;
};

/// Anti-aliased [1, 1, S, S] rendering (4x4 supersampling, coverage in
/// [0, 1]). With dx = dy = 0, rendering at theta + 90 is bitwise the rot90
/// of rendering at theta.
TensorF render_shape(const RenderParams& params, int image_size);

struct Split {
  TensorF images;  // [n, 1, S, S]
  std::vector<int> labels;
  std::vector<float> theta_deg;  // [0, 360)

  std::size_t size() const { return labels.size(); }
  /// Images, labels and angles for the given sample indices.
  Split gather(std::span<const std::size_t> indices) const;
};

struct Dataset {
  DatasetSpec spec;
  Split train;
  Split test;
};

/// Class of sample i is i mod 4. Every sample draws from its own stream
/// split off the seed, so samples are independent of generation order.
Dataset gen_dataset(const DatasetSpec& spec);

/// Symmetry orders of a batch of labels.
std::vector<int> symmetry_orders(std::span<const int> labels);

/// Absolute orientation difference in degrees, modulo the symmetry order.
double angular_difference_deg(double pred_deg, double target_deg, int symmetry);

}  // namespace rotequiv::harness

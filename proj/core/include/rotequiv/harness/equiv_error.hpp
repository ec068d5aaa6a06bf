// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rotequiv/group.hpp"
#include "rotequiv/model.hpp"

namespace rotequiv::harness {

/// Equivariance error between f(T x) and T'(f(x)) for a batch.
///
/// Per sample with C x H x W features and difference d:
///   epsilon    = sqrt(sum d^2) / (H * W * C)
///   normalized = sqrt(sum d^2) / sqrt(sum f(x)^2)
/// Both are averaged over the batch.
struct EquivError {
  double epsilon = 0.0;
  double normalized = 0.0;
};

/// Compares two equally shaped NCHW batches: `rotated_first` = f(T x),
/// `rotated_after` = T'(f(x)). `reference` = f(x) supplies the normalizer.
EquivError compare_features(const TensorF& rotated_first, const TensorF& rotated_after, const TensorF& reference);

using FeatureFn = std::function<TensorF(const TensorF&)>;

/// Error of `f` under q clockwise quarter turns of the input, with the output
/// acted on by grid_act for `group`.
EquivError equiv_error(const FeatureFn& f, const TensorF& x, int quarter_turns, const rotequiv::CyclicGroup& group);

struct EquivErrorRow {
  std::string stage;
  int angle_deg;
  double epsilon;
  double normalized;
  friend bool operator==(const EquivErrorRow&, const EquivErrorRow&) = default;
};

struct EquivErrorReport {
  std::vector<EquivErrorRow> rows;
  std::string input_descriptor;
  std::string model_fingerprint;

  /// Largest normalized error over all rows of `stage` (all stages if empty).
  double max_normalized(const std::string& stage = "") const;
};

/// Stagewise error of every model tap for each angle (multiples of 90). The
/// model runs in evaluation mode without recording gradients, so training
/// state is untouched.
EquivErrorReport stagewise_error(nn::Model<float>& model, const TensorF& inputs, std::span<const int> angles_deg);

/// Hex digest of the model's parameters and buffers.
std::string model_fingerprint(nn::Model<float>& model);

/// Throws std::invalid_argument unless `angle_deg` is a multiple of 90.
int quarter_turns_for_angle(int angle_deg);

}  // namespace rotequiv::harness

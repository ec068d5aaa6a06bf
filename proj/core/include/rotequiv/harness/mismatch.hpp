// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#pragma once

#include <utility>
#include <vector>

namespace rotequiv::harness {

/// 1-based (x = column, y = row) coordinates.
using Point = std::pair<int, int>;

/// Centres visited by a stride-2 kernel on a 2n x 2n image, before and after
/// a clockwise quarter turn, both expressed in the original image's frame.
struct SamplingMismatch {
  int n = 0;
  std::vector<Point> pre;   // (2i+1, 2j+1)
  std::vector<Point> post;  // (2j+1, 2n-2i)
  bool pre_rows_odd = false;
  bool post_rows_even = false;
  bool disjoint = false;  // no common point
};

SamplingMismatch sampling_mismatch_demo(int n);

}  // namespace rotequiv::harness

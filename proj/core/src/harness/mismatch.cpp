// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#include "rotequiv/harness/mismatch.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>

namespace rotequiv::harness {

SamplingMismatch sampling_mismatch_demo(int n) {
  if (n < 1) throw std::invalid_argument("sampling mismatch demo needs n >= 1, got " + std::to_string(n));
  SamplingMismatch out;
  out.n = n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      out.pre.emplace_back(2 * i + 1, 2 * j + 1);
      out.post.emplace_back(2 * j + 1, 2 * n - 2 * i);
    }
  out.pre_rows_odd = std::all_of(out.pre.begin(), out.pre.end(), [](const Point& p) { return p.second % 2 == 1; });
  out.post_rows_even = std::all_of(out.post.begin(), out.post.end(), [](const Point& p) { return p.second % 2 == 0; });
  const std::set<Point> pre(out.pre.begin(), out.pre.end());
  out.disjoint = std::none_of(out.post.begin(), out.post.end(), [&](const Point& p) { return pre.count(p) != 0; });
  return out;
}

}  // namespace rotequiv::harness

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#pragma once

#include <cstddef>
#include <functional>

#include "rotequiv/autodiff.hpp"
#include "rotequiv/rng.hpp"

namespace rotequiv::ad {

using UnaryOpD = std::function<Var<double>(const Var<double>&)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;   // at worst_index
  double numerical = 0.0;  // at worst_index
};

/// Compares reverse-mode gradients of <op(x), R> against the fourth-order
/// central difference with step `eps` (samples at +-eps and +-2 eps), where R
/// is a fixed random projection drawn from `rng`. Inputs must stay at least
/// 2 eps away from kinks.
/// Per-element error is |a - n| / (|a| + |n| + 1e-8); the maximum is returned.
GradCheckResult finite_diff_check(const UnaryOpD& op, const TensorD& input, double eps, Rng& rng);

}  // namespace rotequiv::ad

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rotequiv::harness {

/// Names of every differentiable operation covered by the finite-difference
/// suite, from tensor primitives up to a small full model.
std::vector<std::string> gradcheck_op_names();

struct GradCheckRow {
  std::string op;
  int points;
  double max_rel_error;  // worst over all points and coordinates
  bool pass;
};

/// Central-difference checks in double precision. Each point draws fresh
/// inputs and layer weights. `op` is a name from gradcheck_op_names() or
/// "all"; unknown names throw std::invalid_argument.
std::vector<GradCheckRow> run_gradcheck(const std::string& op, int points = 10, std::uint64_t seed = 0,
                                        double step = 1e-3, double tolerance = 1e-4);

/// CSV with header op,points,max_rel_error,verdict.
std::string to_csv(const std::vector<GradCheckRow>& rows);

}  // namespace rotequiv::harness

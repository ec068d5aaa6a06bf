// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#include "rotequiv/harness/strictness.hpp"

namespace rotequiv::harness {

std::optional<std::size_t> StrictnessReport::first_violation() const {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].pass) return i;
  }
  return std::nullopt;
}

StrictnessReport check_strictness(const nn::NetworkConfig& config, int input_size) {
  nn::NetworkConfig c = config;
  c.input_size = input_size;
  StrictnessReport report;
  report.input_size = input_size;
  const auto plan = nn::plan_convs(c);
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const auto& p = plan[i];
    const int residue = lattice_residue(p.spec, p.in_extent);
    const bool pass = residue == 0;
    report.rows.push_back({static_cast<int>(i), p.name, p.in_extent + 2 * p.spec.p, p.spec.k, p.spec.s, residue, pass});
    report.strict = report.strict && pass;
  }
  return report;
}

}  // namespace rotequiv::harness

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rotequiv/harness/equiv_error.hpp"
#include "rotequiv/harness/robustness.hpp"
#include "rotequiv/harness/strictness.hpp"
#include "rotequiv/harness/train.hpp"

namespace rotequiv::harness {

/// CSV text with fixed headers:
///   equivariance  stage,angle_deg,epsilon,epsilon_normalized
///   robustness    angle_deg,accuracy,mean_angular_error_deg
///   training      epoch,loss,accuracy,angular_error_deg,eps_<stage>...
///   strictness    layer,name,padded_in,k,s,residue,verdict
/// Reals are printed with 17 significant digits so parsing restores them
/// exactly.
std::string to_csv(const EquivErrorReport& report);
std::string to_csv(const RobustnessCurve& curve);
std::string to_csv(const TrainingHistory& history);
std::string to_csv(const StrictnessReport& report);

/// Inverses of to_csv. Throw std::runtime_error on a header or field mismatch.
EquivErrorReport parse_equiv_csv(const std::string& text);
RobustnessCurve parse_robustness_csv(const std::string& text);
TrainingHistory parse_training_csv(const std::string& text);
StrictnessReport parse_strictness_csv(const std::string& text);

/// Writes `text` to `path`, creating parent directories. Throws
/// std::runtime_error if the file cannot be written.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// Minimal SVG line chart. With log_y the y axis is log10 and non-positive
/// values are clamped to the smallest positive one.
std::string svg_line_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<PlotSeries>& series, bool log_y = false);

}  // namespace rotequiv::harness

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rotequiv::cli {

enum ExitCode : int { kOk = 0, kViolation = 1, kUsage = 2 };

/// Flags shared by every subcommand.
struct Common {
  std::string config_path;  // empty: built-in defaults
  std::vector<std::string> overrides;
  std::string mode;  // empty, "strict" or "approx"
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::vector<std::string> argv;
};

struct DataFlags {
  int n_train = 2000;
  int n_test = 500;
  double noise_std = 0.05;
  double angle_range = 360.0;
};

struct CheckArgs {
  int input_size = 0;  // 0: config value
};

struct EquivArgs {
  std::vector<int> angles{90, 180, 270};
  int samples = 10;
  std::string checkpoint;
};

struct TrainArgs {
  DataFlags data;
  int epochs = 20;
  int batch_size = 16;
  double lr = 2.5e-4;
  double weight_decay = 0.05;
  double angle_weight = 1.0;
  int eps_samples = 8;
  std::string resume;
};

struct RobustnessArgs {
  DataFlags data;
  std::string checkpoint;
  std::vector<double> angles{0, 30, 60, 90, 120, 150, 180, 210, 240, 270, 300, 330};
};

struct MismatchArgs {
  int n = 2;
};

struct GradcheckArgs {
  std::string op = "all";
  int points = 10;
};

struct GenDataArgs {
  DataFlags data;
  int image_size = 64;
  int dump = 0;  // PGM files written for the first training images
};

int cmd_check(const Common& c, const CheckArgs& a);
int cmd_equiv_error(const Common& c, const EquivArgs& a);
int cmd_train(const Common& c, const TrainArgs& a);
int cmd_robustness(const Common& c, const RobustnessArgs& a);
int cmd_mismatch_demo(const Common& c, const MismatchArgs& a);
int cmd_gradcheck(const Common& c, const GradcheckArgs& a);
int cmd_gen_data(const Common& c, const GenDataArgs& a);

}  // namespace rotequiv::cli

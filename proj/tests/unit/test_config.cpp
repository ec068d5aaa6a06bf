// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "rotequiv/config.hpp"

namespace rotequiv::nn {
namespace {

int error_line(std::string_view text) {
  try {
    (void)parse_config(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

TEST(Config, DefaultsMatchTheDocumentedNetwork) {
  const auto c = NetworkConfig::defaults();
  EXPECT_EQ(c.orientations, 8);
  EXPECT_EQ(c.input_size, 64);
  EXPECT_EQ(c.stem.channels, 16);
  ASSERT_EQ(c.stages.size(), 4u);
  EXPECT_EQ(c.stages[0].channels, 32);
  EXPECT_EQ(c.stages[3].channels, 128);
  EXPECT_EQ(c.head.branch_modules, 3);
  EXPECT_EQ(c.task.num_classes, 4);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, SerializeParseRoundTrip) {
  auto c = NetworkConfig::defaults();
  c.orientations = 4;
  c.stages[1].attention = false;
  c.stages[2].downsample_mode = DownsampleMode::approx;
  c.stages[3].num_blocks = 2;
  c.head = {5, 3};
  EXPECT_EQ(parse_config(serialize(c)), c);
  EXPECT_EQ(serialize(parse_config(serialize(c))), serialize(c));
}

TEST(Config, CommentsAndWhitespaceAreIgnored) {
  const auto c = parse_config(
      "# leading comment\n"
      "[network]\n  orientations = 4   ; trailing\n\n"
      "[stem]\nchannels=8\n"
      "[stage.1]\nchannels = 8\n");
  EXPECT_EQ(c.orientations, 4);
  EXPECT_EQ(c.stem.channels, 8);
  ASSERT_EQ(c.stages.size(), 1u);
  EXPECT_EQ(c.stages[0].num_blocks, 1);
}

TEST(Config, ErrorsReportTheirLine) {
  EXPECT_EQ(error_line("[network]\norientations = 4\norientations = 8\n"), 3);
  EXPECT_EQ(error_line("[network]\n\n[nope]\n"), 3);
  EXPECT_EQ(error_line("[network]\norientations = x\n"), 2);
  EXPECT_EQ(error_line("[stage.1]\nattention = maybe\n"), 2);
  EXPECT_EQ(error_line("[stem]\ndownsample_mode = loose\n"), 2);
  EXPECT_EQ(error_line("orientations = 4\n"), 1);
  EXPECT_EQ(error_line("[network\n"), 1);
  EXPECT_EQ(error_line("[network]\nwidth = 3\n"), 2);
  EXPECT_EQ(error_line("[stage.1]\n[stage.1]\n"), 2);
}

TEST(Config, StructuralErrorsHaveNoLine) {
  EXPECT_EQ(error_line("[stage.1]\nchannels = 16\n[stage.3]\nchannels = 16\n"), 0);
  EXPECT_EQ(error_line("[network]\norientations = 8\n"), 0);  // no stages
  EXPECT_EQ(error_line("[network]\norientations = 3\n[stage.1]\nchannels = 16\n"), 0);
}

TEST(Config, ValidationNamesTheField) {
  auto c = NetworkConfig::defaults();
  c.head.branch_modules = 4;
  try {
    c.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("head.branch_modules"), std::string::npos);
  }
  c = NetworkConfig::defaults();
  c.stages[2].channels = 100;
  EXPECT_THROW(c.validate(), ConfigError);
  c = NetworkConfig::defaults();
  c.input_size = 8;  // collapses before the last stage
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, OverridesApplyOrLeaveConfigUntouched) {
  auto c = NetworkConfig::defaults();
  apply_override(c, "stage.2.channels=48");
  apply_override(c, "network.orientations = 4");
  EXPECT_EQ(c.stages[1].channels, 48);
  EXPECT_EQ(c.orientations, 4);
  const auto before = c;
  EXPECT_THROW(apply_override(c, "stage.9.channels=8"), ConfigError);
  EXPECT_THROW(apply_override(c, "network.orientations=5"), ConfigError);
  EXPECT_THROW(apply_override(c, "orientations"), ConfigError);
  EXPECT_EQ(c, before);
  set_downsample_mode(c, DownsampleMode::approx);
  EXPECT_EQ(c.stem.downsample_mode, DownsampleMode::approx);
  for (const auto& s : c.stages) EXPECT_EQ(s.downsample_mode, DownsampleMode::approx);
}

TEST(Config, LoadPrefixesTheFileName) {
  const auto path = std::filesystem::temp_directory_path() / "rotequiv_test_bad.ini";
  std::ofstream(path) << "[network]\norientations = x\n";
  try {
    (void)load_config(path);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 2);
    EXPECT_EQ(std::string(e.what()).rfind(path.string() + ":2: ", 0), 0u) << e.what();
  }
  std::filesystem::remove(path);
  EXPECT_THROW((void)load_config(path), ConfigError);
}

TEST(PlanConvs, DefaultStrictPlan) {
  const auto plan = plan_convs(NetworkConfig::defaults());
  ASSERT_EQ(plan.size(), 18u);
  EXPECT_EQ(plan[0].name, "stem.conv");
  EXPECT_EQ(plan[1].name, "stem.downsample.tuning");
  EXPECT_EQ(plan[1].in_extent, 64);
  EXPECT_EQ(plan[1].out_extent, 63);
  EXPECT_EQ(plan[2].out_extent, 32);
  EXPECT_EQ(plan.back().name, "head.aggregate");
  EXPECT_EQ(plan.back().role, LayerRole::aggregate);
  EXPECT_EQ(plan.back().in_extent, 2);
  for (const auto& p : plan) {
    if (p.role == LayerRole::down) EXPECT_EQ(p.in_extent % 2, 1) << p.name;
  }
}

TEST(PlanConvs, ApproxPlanSkipsTuning) {
  auto c = NetworkConfig::defaults();
  set_downsample_mode(c, DownsampleMode::approx);
  const auto plan = plan_convs(c);
  EXPECT_EQ(plan.size(), 13u);
  EXPECT_EQ(plan[1].name, "stem.downsample.down");
  EXPECT_EQ(plan[1].in_extent, 64);
  EXPECT_EQ(plan[1].out_extent, 32);
}

}  // namespace
}  // namespace rotequiv::nn

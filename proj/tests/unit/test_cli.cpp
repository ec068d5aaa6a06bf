// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include "json.hpp"
#include <sstream>

namespace {

namespace fs = std::filesystem;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("rotequiv_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    std::ofstream(dir_ / "small.ini") << "[network]\norientations = 4\ninput_size = 16\n"
                                         "[stem]\nchannels = 8\n"
                                         "[stage.1]\nchannels = 8\n"
                                         "[stage.2]\nchannels = 16\n"
                                         "[head]\nbranch_modules = 3\nhidden_channels = 2\n";
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args) {
    const std::string cmd = std::string(ROTEQUIV_CLI) + " " + args + " > " + (dir_ / "stdout.txt").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  std::string output() const { return slurp(dir_ / "stdout.txt"); }
  static std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
  }
  std::string small() const { return "-c " + (dir_ / "small.ini").string(); }
  std::string data() const { return " --n-train 16 --n-test 8 --eps-samples 2 --batch-size 8"; }

  fs::path dir_;
};

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("equiv-error --angles 45 -o " + dir_.string()), 2);
  std::ofstream(dir_ / "bad.ini") << "[network]\norientations = x\n";
  EXPECT_EQ(run("check -c " + (dir_ / "bad.ini").string()), 2);
  EXPECT_NE(output().find("bad.ini:2:"), std::string::npos) << output();
  EXPECT_EQ(run("--help"), 0);
}

TEST_F(Cli, CheckExitCodesFollowTheVerdict) {
  EXPECT_EQ(run("check -o " + (dir_ / "s").string()), 0);
  EXPECT_TRUE(fs::exists(dir_ / "s" / "strictness.csv"));
  EXPECT_EQ(run("check --mode approx -o " + (dir_ / "a").string()), 1);
  EXPECT_NE(output().find("stem.downsample.down"), std::string::npos) << output();
}

TEST_F(Cli, EquivErrorWritesCsvAndManifest) {
  EXPECT_EQ(run("equiv-error " + small() + " --samples 2 -o " + dir_.string()), 0);
  const std::string csv = slurp(dir_ / "equiv_error.csv");
  EXPECT_EQ(csv.rfind("stage,angle_deg,epsilon,epsilon_normalized\n", 0), 0u);
  const auto manifest = nlohmann::json::parse(slurp(dir_ / "manifest.json"));
  EXPECT_EQ(manifest["tool"], "rotequiv");
  EXPECT_TRUE(manifest.contains("seed"));
  EXPECT_TRUE(manifest.contains("argv"));
}

TEST_F(Cli, ZeroEpochsWritesOnlyTheInitialCheckpoint) {
  EXPECT_EQ(run("train " + small() + data() + " --epochs 0 -o " + dir_.string()), 0) << output();
  std::vector<std::string> ckpts;
  for (const auto& e : fs::directory_iterator(dir_ / "checkpoints")) ckpts.push_back(e.path().filename().string());
  EXPECT_EQ(ckpts, (std::vector<std::string>{"epoch_000.ckpt"}));
  const std::string csv = slurp(dir_ / "training.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
}

TEST_F(Cli, ResumeReproducesTheLogBitwise) {
  ASSERT_EQ(run("train " + small() + data() + " --epochs 2 -o " + (dir_ / "full").string()), 0) << output();
  ASSERT_EQ(run("train " + small() + data() + " --epochs 2 -o " + (dir_ / "resumed").string() + " --resume " +
                (dir_ / "full" / "checkpoints" / "epoch_001.ckpt").string()),
            0)
      << output();
  EXPECT_EQ(slurp(dir_ / "resumed" / "training.csv"), slurp(dir_ / "full" / "training.csv"));
  EXPECT_EQ(slurp(dir_ / "resumed" / "checkpoints" / "epoch_002.ckpt"),
            slurp(dir_ / "full" / "checkpoints" / "epoch_002.ckpt"));
}

TEST_F(Cli, RobustnessReadsACheckpoint) {
  ASSERT_EQ(run("train " + small() + data() + " --epochs 0 -o " + dir_.string()), 0);
  EXPECT_EQ(run("robustness --checkpoint " + (dir_ / "checkpoints" / "epoch_000.ckpt").string() +
                " --n-test 8 --angles 0 90 45 -o " + (dir_ / "r").string()),
            0)
      << output();
  const std::string csv = slurp(dir_ / "r" / "robustness.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

TEST_F(Cli, GradcheckAndMismatch) {
  EXPECT_EQ(run("gradcheck --op silu -o " + dir_.string()), 0);
  EXPECT_NE(slurp(dir_ / "gradcheck.csv").find("silu,10,"), std::string::npos);
  EXPECT_EQ(run("gradcheck --op nope -o " + dir_.string()), 2);
  EXPECT_EQ(run("mismatch-demo --n 2 -o " + dir_.string()), 0);
  EXPECT_NE(slurp(dir_ / "mismatch.csv").find("post,1,4"), std::string::npos);
}

TEST_F(Cli, GenDataIsDeterministic) {
  ASSERT_EQ(run("gen-data --n-train 8 --n-test 4 --image-size 16 --seed 3 -o " + (dir_ / "a").string()), 0) << output();
  ASSERT_EQ(run("gen-data --n-train 8 --n-test 4 --image-size 16 --seed 3 -o " + (dir_ / "b").string()), 0);
  EXPECT_EQ(slurp(dir_ / "a" / "dataset.csv"), slurp(dir_ / "b" / "dataset.csv"));
  EXPECT_FALSE(slurp(dir_ / "a" / "dataset.csv").empty());
}

}  // namespace

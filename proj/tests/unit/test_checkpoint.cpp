// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "../support/tiny_configs.hpp"
#include "rotequiv/checkpoint.hpp"
#include "rotequiv/model.hpp"

namespace rotequiv::nn {
namespace {

namespace fs = std::filesystem;

class CheckpointTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("rotequiv_ckpt_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST_F(CheckpointTest, AllValueKindsRoundTripBitwise) {
  Rng rng(1);
  Checkpoint c;
  TensorF f = TensorF::randn({2, 3}, rng);
  f[0] = -0.0f;
  f[1] = std::numeric_limits<float>::denorm_min();
  c.put("f", f);
  c.put("d", TensorD::randn({4}, rng));
  c.put("i", std::vector<std::int64_t>{-1, 0, std::numeric_limits<std::int64_t>::max()});
  c.put("s", std::string("[network]\norientations = 8\n"));
  c.put("empty", std::string());
  c.save(dir_ / "a.ckpt");
  const auto back = Checkpoint::load(dir_ / "a.ckpt");
  EXPECT_TRUE(bitwise_equal(back.tensor_f32("f"), f));
  EXPECT_TRUE(bitwise_equal(std::get<TensorD>(back.entries().at("d")), std::get<TensorD>(c.entries().at("d"))));
  EXPECT_EQ(back.ints("i"), c.ints("i"));
  EXPECT_EQ(back.text("s"), c.text("s"));
  EXPECT_EQ(back.text("empty"), "");
  EXPECT_THROW(back.text("f"), std::runtime_error);
  EXPECT_THROW(back.ints("missing"), std::out_of_range);

  // Saving the loaded checkpoint reproduces the file byte for byte.
  back.save(dir_ / "b.ckpt");
  std::ifstream a(dir_ / "a.ckpt", std::ios::binary), b(dir_ / "b.ckpt", std::ios::binary);
  EXPECT_EQ(std::string(std::istreambuf_iterator<char>(a), {}), std::string(std::istreambuf_iterator<char>(b), {}));
}

TEST_F(CheckpointTest, RejectsCorruptFiles) {
  Checkpoint c;
  c.put("x", TensorF({16}, 1.0f));
  c.save(dir_ / "ok.ckpt");
  const auto size = fs::file_size(dir_ / "ok.ckpt");
  fs::copy_file(dir_ / "ok.ckpt", dir_ / "short.ckpt");
  fs::resize_file(dir_ / "short.ckpt", size - 5);
  EXPECT_THROW(Checkpoint::load(dir_ / "short.ckpt"), std::runtime_error);
  std::ofstream(dir_ / "magic.ckpt", std::ios::binary) << "NOTACKPT and then some";
  EXPECT_THROW(Checkpoint::load(dir_ / "magic.ckpt"), std::runtime_error);
  EXPECT_THROW(Checkpoint::load(dir_ / "absent.ckpt"), std::runtime_error);
}

TEST_F(CheckpointTest, RestoresAModel) {
  Rng a(2), b(3);
  Model<float> src(testing::small_config(), a), dst(testing::small_config(), b);
  Checkpoint c;
  store_registry(c, src.registry());
  c.save(dir_ / "m.ckpt");
  auto reg = dst.registry();
  restore_registry(Checkpoint::load(dir_ / "m.ckpt"), reg);
  const auto rs = src.registry();
  for (std::size_t i = 0; i < rs.params.size(); ++i) {
    EXPECT_TRUE(bitwise_equal(rs.params[i].var.value(), reg.params[i].var.value())) << rs.params[i].name;
  }
  for (std::size_t i = 0; i < rs.buffers.size(); ++i) {
    EXPECT_TRUE(bitwise_equal(*rs.buffers[i].tensor, *reg.buffers[i].tensor)) << rs.buffers[i].name;
  }

  Rng d(4);
  Model<float> other(testing::small_config(8, 16), d);
  auto wrong = other.registry();
  EXPECT_THROW(restore_registry(Checkpoint::load(dir_ / "m.ckpt"), wrong), std::runtime_error);
}

}  // namespace
}  // namespace rotequiv::nn

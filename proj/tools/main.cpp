// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#include <cstdio>
#include <exception>
#include <functional>

#include "CLI11.hpp"
#include "commands.hpp"
#include "rotequiv/config.hpp"
#include "rotequiv/harness/train.hpp"

using namespace rotequiv::cli;

namespace {

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("-c,--config", c.config_path, "Network config file (default: built-in)")->check(CLI::ExistingFile);
  sub->add_option("--set", c.overrides, "Config override section.key=value (repeatable)");
  sub->add_option("--mode", c.mode, "Force every downsampling block to strict or approx")
      ->check(CLI::IsMember({"strict", "approx"}));
  sub->add_option("--seed", c.seed, "Seed for every random draw");
  sub->add_option("-o,--out", c.out_dir, "Output directory");
}

void add_data(CLI::App* sub, DataFlags& d) {
  sub->add_option("--n-train", d.n_train, "Training samples")->check(CLI::NonNegativeNumber);
  sub->add_option("--n-test", d.n_test, "Held-out samples")->check(CLI::NonNegativeNumber);
  sub->add_option("--noise-std", d.noise_std, "Pixel noise standard deviation")->check(CLI::NonNegativeNumber);
  sub->add_option("--angle-range", d.angle_range, "Orientations drawn from [0, angle-range) degrees")
      ->check(CLI::Range(1e-9, 360.0));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rotation-equivariant CNN toolkit: strictness checks, equivariance error, training"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ROTEQUIV_VERSION);

  Common common;
  common.argv.assign(argv, argv + argc);
  std::function<int()> run;

  CheckArgs check;
  auto* c_check = app.add_subcommand("check", "Static strictness check of every convolution");
  add_common(c_check, common);
  c_check->add_option("--input-size", check.input_size, "Input extent (default: config value)")
      ->check(CLI::PositiveNumber);
  c_check->callback([&] { run = [&] { return cmd_check(common, check); }; });

  EquivArgs equiv;
  auto* c_equiv = app.add_subcommand("equiv-error", "Stagewise equivariance error of a model");
  add_common(c_equiv, common);
  c_equiv->add_option("--angles", equiv.angles, "Rotation angles, multiples of 90")->delimiter(',');
  c_equiv->add_option("--samples", equiv.samples, "Random inputs")->check(CLI::PositiveNumber);
  c_equiv->add_option("--checkpoint", equiv.checkpoint, "Trained checkpoint (default: fresh model)")
      ->check(CLI::ExistingFile);
  c_equiv->callback([&] { run = [&] { return cmd_equiv_error(common, equiv); }; });

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Train on the synthetic shape dataset");
  add_common(c_train, common);
  add_data(c_train, train.data);
  c_train->add_option("--epochs", train.epochs, "Epochs")->check(CLI::NonNegativeNumber);
  c_train->add_option("--batch-size", train.batch_size, "Mini-batch size")->check(CLI::PositiveNumber);
  c_train->add_option("--lr", train.lr, "Base learning rate")->check(CLI::NonNegativeNumber);
  c_train->add_option("--weight-decay", train.weight_decay, "Decoupled weight decay")->check(CLI::NonNegativeNumber);
  c_train->add_option("--angle-weight", train.angle_weight, "Weight of the orientation loss")
      ->check(CLI::NonNegativeNumber);
  c_train->add_option("--eps-samples", train.eps_samples, "Test images for the per-epoch error")
      ->check(CLI::NonNegativeNumber);
  c_train->add_option("--resume", train.resume, "Continue from a checkpoint")->check(CLI::ExistingFile);
  c_train->callback([&] { run = [&] { return cmd_train(common, train); }; });

  RobustnessArgs robust;
  auto* c_robust = app.add_subcommand("robustness", "Accuracy of a checkpoint on rotated test images");
  add_common(c_robust, common);
  add_data(c_robust, robust.data);
  c_robust->add_option("--checkpoint", robust.checkpoint, "Trained checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  c_robust->add_option("--angles", robust.angles, "Rotation angles in degrees")->delimiter(',');
  c_robust->callback([&] { run = [&] { return cmd_robustness(common, robust); }; });

  MismatchArgs mismatch;
  auto* c_mismatch = app.add_subcommand("mismatch-demo", "Stride-2 sampling points before and after a quarter turn");
  add_common(c_mismatch, common);
  c_mismatch->add_option("--n", mismatch.n, "Half the image size")->check(CLI::PositiveNumber);
  c_mismatch->callback([&] { run = [&] { return cmd_mismatch_demo(common, mismatch); }; });

  GradcheckArgs grad;
  auto* c_grad = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  add_common(c_grad, common);
  c_grad->add_option("--op", grad.op, "Operation name or all");
  c_grad->add_option("--points", grad.points, "Random points per operation")->check(CLI::PositiveNumber);
  c_grad->callback([&] { run = [&] { return cmd_gradcheck(common, grad); }; });

  GenDataArgs gen;
  auto* c_gen = app.add_subcommand("gen-data", "Generate the synthetic shape dataset");
  add_common(c_gen, common);
  add_data(c_gen, gen.data);
  c_gen->add_option("--image-size", gen.image_size, "Image extent")->check(CLI::Range(8, 4096));
  c_gen->add_option("--dump", gen.dump, "Write the first N training images as PGM")->check(CLI::NonNegativeNumber);
  c_gen->callback([&] { run = [&] { return cmd_gen_data(common, gen); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    return run();
  } catch (const rotequiv::nn::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kUsage;
  } catch (const rotequiv::harness::DivergenceError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kViolation;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  }
}

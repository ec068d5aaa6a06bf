// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#include <gtest/gtest.h>

#include <cmath>

#include "rotequiv/autodiff.hpp"
#include "rotequiv/gradcheck.hpp"
#include "rotequiv/optim.hpp"

namespace rotequiv::ad {
namespace {

TEST(Autodiff, ProductRuleAndSharedNodes) {
  auto x = Var<double>::parameter(TensorD({3}, {1.0, 2.0, -3.0}));
  // loss = sum(x * x + 2x) -> d/dx = 2x + 2
  const auto loss = sum(add(mul(x, x), scale(x, 2.0)));
  backward(loss);
  EXPECT_EQ(x.grad().storage(), (std::vector<double>{4.0, 6.0, -4.0}));
  EXPECT_DOUBLE_EQ(loss.value().item(), 1 + 4 + 9 + 2 * (1 + 2 - 3));
}

TEST(Autodiff, GradientsAccumulateUntilZeroed) {
  auto x = Var<double>::parameter(TensorD({2}, {1.0, 1.0}));
  backward(sum(x));
  backward(sum(x));
  EXPECT_EQ(x.grad().storage(), (std::vector<double>{2.0, 2.0}));
  x.zero_grad();
  EXPECT_EQ(x.grad().storage(), (std::vector<double>{0.0, 0.0}));
}

TEST(Autodiff, NoGradGuardRecordsNothing) {
  auto x = Var<double>::parameter(TensorD({2}, 1.0));
  {
    NoGradGuard guard;
    EXPECT_FALSE(grad_enabled());
    const auto y = mul(x, x);
    EXPECT_FALSE(y.requires_grad());
  }
  EXPECT_TRUE(grad_enabled());
  EXPECT_TRUE(mul(x, x).requires_grad());
}

TEST(Autodiff, BackwardNeedsScalar) {
  auto x = Var<double>::parameter(TensorD({2}, 1.0));
  EXPECT_THROW(backward(x), ShapeError);
}

TEST(Autodiff, CrossEntropyValue) {
  // Uniform logits: loss = log K.
  const Var<double> logits(TensorD({2, 4}, 0.5));
  const int labels[] = {1, 3};
  EXPECT_NEAR(cross_entropy<double>(logits, labels).value().item(), std::log(4.0), 1e-15);
  const int bad[] = {1, 4};
  EXPECT_THROW(cross_entropy<double>(logits, bad), std::invalid_argument);
}

TEST(Autodiff, GroupMeanIsOrderIndependentBitwise) {
  Rng rng(2);
  TensorF a = TensorF::randn({3, 8}, rng);
  TensorF b = a;
  // Reverse each group of 4.
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t g = 0; g < 2; ++g)
      for (std::size_t i = 0; i < 4; ++i) b[r * 8 + g * 4 + i] = a[r * 8 + g * 4 + 3 - i];
  EXPECT_TRUE(bitwise_equal(group_mean(Var<float>(a), 4).value(), group_mean(Var<float>(b), 4).value()));
}

TEST(Autodiff, ChannelPermuteValidatesPermutation) {
  const Var<float> x(TensorF({1, 3, 1, 1}, {0, 1, 2}));
  const std::size_t perm[] = {2, 0, 1};
  EXPECT_EQ(channel_permute<float>(x, perm).value().storage(), (std::vector<float>{2, 0, 1}));
  const std::size_t dup[] = {0, 0, 1};
  EXPECT_THROW(channel_permute<float>(x, dup), std::invalid_argument);
}

TEST(GradCheck, DetectsAWrongGradient) {
  // An op whose backward pretends the derivative of x^2 is x.
  const UnaryOpD wrong = [](const Var<double>& x) {
    TensorD v = x.value();
    for (auto& e : v.storage()) e = e * e;
    return make_op<double>(std::move(v), {x}, [](const TensorD& g, std::span<const NodePtr<double>> p) {
      TensorD d = g;
      for (std::size_t i = 0; i < d.numel(); ++i) d[i] *= p[0]->value[i];
      p[0]->accumulate(std::move(d));
    });
  };
  Rng rng(1);
  const auto r = finite_diff_check(wrong, TensorD::uniform({5}, rng, 0.5, 1.5), 1e-3, rng);
  EXPECT_GT(r.max_rel_error, 0.1);
  const UnaryOpD right = [](const Var<double>& x) { return mul(x, x); };
  EXPECT_LT(finite_diff_check(right, TensorD::uniform({5}, rng, 0.5, 1.5), 1e-3, rng).max_rel_error, 1e-8);
}

TEST(AdamW, FirstStepMatchesClosedForm) {
  auto w = Var<double>::parameter(TensorD({2}, {1.0, -2.0}));
  AdamWConfig cfg;
  cfg.lr = 0.1;
  cfg.weight_decay = 0.5;
  AdamW<double> opt({{"w", w}}, cfg);
  backward(sum(mul(w, Var<double>(TensorD({2}, {3.0, -4.0})))));
  opt.step();
  // With bias correction, the first update is g / (|g| + eps) = sign(g).
  const double eps_term3 = 3.0 / (3.0 + 1e-8), eps_term4 = -4.0 / (4.0 + 1e-8);
  EXPECT_DOUBLE_EQ(w.value()[0], 1.0 * (1 - 0.1 * 0.5) - 0.1 * eps_term3);
  EXPECT_DOUBLE_EQ(w.value()[1], -2.0 * (1 - 0.1 * 0.5) - 0.1 * eps_term4);
  EXPECT_EQ(opt.step_count(), 1);
}

TEST(AdamW, ZeroLearningRateLeavesParametersBitwise) {
  Rng rng(4);
  auto w = Var<float>::parameter(TensorF::randn({7}, rng));
  const TensorF before = w.value();
  AdamW<float> opt({{"w", w}});
  for (int i = 0; i < 3; ++i) {
    opt.zero_grad();
    backward(sum(mul(w, w)));
    opt.step(0.0);
  }
  EXPECT_TRUE(bitwise_equal(w.value(), before));
}

TEST(AdamW, DefaultsFollowTheTrainingRecipe) {
  const AdamWConfig cfg;
  EXPECT_DOUBLE_EQ(cfg.lr, 2.5e-4);
  EXPECT_DOUBLE_EQ(cfg.weight_decay, 0.05);
  EXPECT_DOUBLE_EQ(cfg.beta1, 0.9);
  EXPECT_DOUBLE_EQ(cfg.beta2, 0.999);
}

TEST(Schedule, ConstantThenCosineToOneTwentieth) {
  EXPECT_DOUBLE_EQ(cosine_half_lr(1.0, 0, 100), 1.0);
  EXPECT_DOUBLE_EQ(cosine_half_lr(1.0, 50, 100), 1.0);
  EXPECT_NEAR(cosine_half_lr(1.0, 75, 100), 0.05 + 0.5 * 0.95, 1e-12);
  EXPECT_DOUBLE_EQ(cosine_half_lr(1.0, 100, 100), 0.05);
  double prev = 1.0;
  for (int s = 50; s <= 100; ++s) {
    const double lr = cosine_half_lr(1.0, s, 100);
    EXPECT_LE(lr, prev);
    prev = lr;
  }
}

}  // namespace
}  // namespace rotequiv::ad

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#include <gtest/gtest.h>

#include "../support/oracles.hpp"
#include "rotequiv/group.hpp"
#include "rotequiv/rng.hpp"

namespace rotequiv {
namespace {

using testing::dot;
using testing::max_abs_diff;

TEST(CyclicGroup, Elements) {
  const CyclicGroup g(8);
  EXPECT_EQ(g.normalize(-1), 7);
  EXPECT_EQ(g.normalize(17), 1);
  EXPECT_DOUBLE_EQ(g.angle_deg(3), 135.0);
  EXPECT_TRUE(g.is_grid(2));
  EXPECT_FALSE(g.is_grid(1));
  EXPECT_EQ(g.quarter_turns(6), 3);
  EXPECT_EQ(g.element_for_quarter_turns(1), 2);
  EXPECT_TRUE(g.supports_quarter_turns());
  EXPECT_FALSE(CyclicGroup(6).supports_quarter_turns());
  EXPECT_TRUE(CyclicGroup(1).supports_quarter_turns());
  EXPECT_THROW(CyclicGroup(0), std::invalid_argument);
}

TEST(KernelRotation, QuarterTurnsAreExactPermutations) {
  Rng rng(1);
  const TensorF k = TensorF::randn({2, 3, 5, 5}, rng);
  EXPECT_TRUE(bitwise_equal(rotate_kernel(k, 90.0), rot90(k, 1)));
  EXPECT_TRUE(bitwise_equal(rotate_kernel(k, 1, CyclicGroup(4)), rot90(k, 1)));
  EXPECT_TRUE(bitwise_equal(rotate_kernel(k, 0, CyclicGroup(8)), k));
}

TEST(KernelRotation, AddingAQuarterTurnComposesBitwise) {
  Rng rng(2);
  const TensorF k = TensorF::randn({4, 2, 3, 3}, rng);
  for (int n : {8, 12, 16}) {
    const CyclicGroup g(n);
    for (int e = 0; e < n; ++e) {
      EXPECT_TRUE(bitwise_equal(rotate_kernel(k, g.normalize(e + n / 4), g), rot90(rotate_kernel(k, e, g), 1)))
          << "N=" << n << " e=" << e;
    }
  }
}

TEST(KernelRotation, ResidualMatchesBilinearOracle) {
  Rng rng(3);
  for (double angle : {45.0, 30.0, 135.0, 200.0, 337.5}) {
    const TensorD k = TensorD::randn({3, 3}, rng);
    const auto want = testing::naive_rotate_bilinear(k.storage(), 3, angle);
    const TensorD got = rotate_kernel(k, angle);
    for (std::size_t i = 0; i < 9; ++i) EXPECT_NEAR(got[i], want[i], 1e-12) << "angle " << angle;
  }
}

TEST(KernelRotation, AdjointIdentity) {
  Rng rng(4);
  const auto rot = KernelRotation::for_angle(5, 30.0);
  const TensorD a = TensorD::randn({25}, rng), b = TensorD::randn({25}, rng);
  TensorD ra({25}), atb({25});
  rot.apply(a.ptr(), ra.ptr());
  rot.apply_adjoint(b.ptr(), atb.ptr());
  EXPECT_NEAR(dot(ra, b), dot(a, atb), 1e-12);
}

TEST(Expand, LiftLayout) {
  Rng rng(5);
  const CyclicGroup g(4);
  const TensorF base = TensorF::randn({2, 1, 3, 3}, rng);
  const TensorF e = expand_lift(base, g);
  ASSERT_EQ(e.shape(), (Shape{8, 1, 3, 3}));
  for (std::size_t f = 0; f < 2; ++f)
    for (int o = 0; o < 4; ++o) {
      TensorF plane({1, 1, 3, 3}), got({1, 1, 3, 3});
      std::copy_n(base.ptr() + f * 9, 9, plane.ptr());
      std::copy_n(e.ptr() + (f * 4 + static_cast<std::size_t>(o)) * 9, 9, got.ptr());
      EXPECT_TRUE(bitwise_equal(got, rot90(plane, o)));
    }
}

TEST(Expand, GroupLayoutRollsThenRotates) {
  Rng rng(6);
  const CyclicGroup g(4);
  const TensorF base = TensorF::randn({1, 8, 3, 3}, rng);  // one out field, two in fields
  const TensorF e = expand_group(base, g);
  ASSERT_EQ(e.shape(), (Shape{4, 8, 3, 3}));
  for (int o = 0; o < 4; ++o)
    for (std::size_t fi = 0; fi < 2; ++fi)
      for (int i = 0; i < 4; ++i) {
        const std::size_t src = fi * 4 + static_cast<std::size_t>(((i - o) % 4 + 4) % 4);
        TensorF plane({3, 3}), got({3, 3});
        std::copy_n(base.ptr() + src * 9, 9, plane.ptr());
        std::copy_n(e.ptr() + (static_cast<std::size_t>(o) * 8 + fi * 4 + static_cast<std::size_t>(i)) * 9, 9,
                    got.ptr());
        EXPECT_TRUE(bitwise_equal(got, rot90(plane, o)));
      }
}

TEST(Expand, AdjointsMatchInnerProducts) {
  Rng rng(7);
  const CyclicGroup g(8);
  const TensorD lb = TensorD::randn({2, 3, 3, 3}, rng);
  const TensorD lg = TensorD::randn({16, 3, 3, 3}, rng);
  EXPECT_NEAR(dot(expand_lift(lb, g), lg), dot(lb, expand_lift_adjoint(lg, g)), 1e-10);
  const TensorD gb = TensorD::randn({2, 16, 3, 3}, rng);
  const TensorD gg = TensorD::randn({16, 16, 3, 3}, rng);
  EXPECT_NEAR(dot(expand_group(gb, g), gg), dot(gb, expand_group_adjoint(gg, g)), 1e-10);
}

TEST(RegularAct, GroupLawHoldsBitwise) {
  Rng rng(8);
  const CyclicGroup g(8);
  const TensorF x = TensorF::randn({2, 16, 5, 5}, rng);
  for (int a : {0, 2, 4, 6})
    for (int b : {0, 2, 4, 6}) {
      EXPECT_TRUE(bitwise_equal(regular_act(regular_act(x, a, g), b, g), regular_act(x, g.normalize(a + b), g)));
    }
  EXPECT_TRUE(bitwise_equal(regular_act(x, 0, g), x));
  EXPECT_THROW(regular_act(x, 1, g), std::invalid_argument);
}

TEST(RegularAct, FeatureOverloadAndGridAct) {
  Rng rng(9);
  const CyclicGroup g(4);
  const EquivFeature<float> f(TensorF::randn({1, 8, 3, 3}, rng), g);
  EXPECT_EQ(f.fields(), 2u);
  EXPECT_TRUE(bitwise_equal(regular_act(f, 1).tensor, regular_act(f.tensor, 1, g)));
  EXPECT_TRUE(bitwise_equal(grid_act(f.tensor, 1, g), regular_act(f.tensor, 1, g)));
  const TensorF plain = TensorF::randn({1, 3, 4, 4}, rng);
  EXPECT_TRUE(bitwise_equal(grid_act(plain, 3, CyclicGroup(1)), rot90(plain, 3)));
  EXPECT_THROW(EquivFeature<float>(TensorF({1, 6, 2, 2}), g), std::invalid_argument);
}

TEST(Equivariance, LiftThenGroupConvolutionCommutesWithQuarterTurns) {
  Rng rng(10);
  const CyclicGroup g(8);
  const TensorD x = TensorD::randn({1, 1, 9, 9}, rng);
  const TensorD lift = expand_lift(TensorD::randn({2, 1, 3, 3}, rng), g);
  const TensorD grp = expand_group(TensorD::randn({3, 16, 3, 3}, rng), g);
  const ConvSpec same{3, 1, 1, 1};
  auto f = [&](const TensorD& in) { return conv2d(conv2d(in, lift, same), grp, same); };
  for (int q = 1; q < 4; ++q) {
    EXPECT_LT(max_abs_diff(f(rot90(x, q)), grid_act(f(x), q, g)), 1e-12) << "q=" << q;
  }
}

}  // namespace
}  // namespace rotequiv

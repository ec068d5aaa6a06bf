// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#include <gtest/gtest.h>

#include "../support/oracles.hpp"
#include "rotequiv/rng.hpp"
#include "rotequiv/tensor.hpp"

namespace rotequiv {
namespace {

using testing::max_abs_diff;

TEST(Shape, NumelAndString) {
  EXPECT_EQ(shape_numel({2, 3, 4}), 24u);
  EXPECT_EQ(shape_numel({}), 1u);
  EXPECT_EQ(shape_str({2, 3}), "[2, 3]");
}

TEST(Tensor, ConstructionChecksDataSize) {
  EXPECT_THROW(TensorF({2, 2}, std::vector<float>{1, 2, 3}), ShapeError);
  TensorF t({2, 3}, 1.5f);
  EXPECT_EQ(t.numel(), 6u);
  EXPECT_EQ(t.at({1, 2}), 1.5f);
  EXPECT_THROW(t.at({2, 0}), ShapeError);
}

TEST(Tensor, CheckFiniteNamesContext) {
  TensorF t({3}, 0.0f);
  EXPECT_NO_THROW(check_finite(t, "ok"));
  t[1] = std::numeric_limits<float>::quiet_NaN();
  try {
    check_finite(t, "stage2 output");
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("stage2 output"), std::string::npos);
  }
}

TEST(Rot90, DocumentedExample) {
  const TensorF t({2, 2}, {1, 2, 3, 4});
  EXPECT_EQ(rot90(t, 1).storage(), (std::vector<float>{3, 1, 4, 2}));
  EXPECT_EQ(rot90(t, -1).storage(), (std::vector<float>{2, 4, 1, 3}));
}

TEST(Rot90, MatchesCoordinateOracle) {
  Rng rng(3);
  for (int h : {1, 2, 5, 6}) {
    const TensorD t = TensorD::randn({static_cast<std::size_t>(h), static_cast<std::size_t>(h)}, rng);
    EXPECT_EQ(rot90(t, 1).storage(), testing::naive_rot90_plane(t.storage(), h)) << "h=" << h;
  }
}

TEST(Rot90, FourTurnsIsIdentityAndTurnsCompose) {
  Rng rng(1);
  const TensorF t = TensorF::randn({2, 3, 5, 5}, rng);
  EXPECT_TRUE(bitwise_equal(rot90(rot90(rot90(rot90(t, 1), 1), 1), 1), t));
  EXPECT_TRUE(bitwise_equal(rot90(rot90(t, 1), 2), rot90(t, 3)));
  EXPECT_THROW(rot90(TensorF({2, 3}), 1), ShapeError);
  EXPECT_NO_THROW(rot90(TensorF({2, 3}), 2));
}

TEST(Roll, ShiftsCyclically) {
  const TensorF t({1, 4}, {0, 1, 2, 3});
  EXPECT_EQ(roll(t, 1, 1).storage(), (std::vector<float>{3, 0, 1, 2}));
  EXPECT_EQ(roll(t, -1, 1).storage(), (std::vector<float>{1, 2, 3, 0}));
  EXPECT_EQ(roll(t, 5, 1).storage(), roll(t, 1, 1).storage());
}

TEST(OutSize, MatchesBruteForceCount) {
  for (int k = 1; k <= 5; ++k)
    for (int p = 0; p <= 2; ++p)
      for (int s = 1; s <= 3; ++s)
        for (int n = 1; n <= 40; ++n) {
          const int expect = testing::brute_force_out_size(n, k, p, s);
          if (expect < 1) {
            EXPECT_THROW(out_size({k, p, s, 1}, n), ShapeError);
          } else {
            EXPECT_EQ(out_size({k, p, s, 1}, n), expect) << k << p << s << " n=" << n;
          }
        }
  EXPECT_THROW(out_size({0, 0, 1, 1}, 5), ShapeError);
  EXPECT_THROW(out_size({3, -1, 1, 1}, 5), ShapeError);
}

TEST(OutSize, DilationEnlargesTheKernel) {
  EXPECT_EQ(out_size({3, 0, 1, 2}, 10), 6);
}

TEST(LatticeResidue, KnownCases) {
  EXPECT_EQ(lattice_residue(kDownSpec, 64), 1);  // i = 66, k = 3
  EXPECT_EQ(lattice_residue(kDownSpec, 63), 0);
  EXPECT_EQ(lattice_residue({3, 1, 1, 1}, 64), 0);
  EXPECT_EQ(to_string(kTuningSpec), "(k=4, p=1, s=1, d=1)");
}

struct ConvCase {
  int n, ci, co, h, k, p, s;
};

class Conv2dOracle : public ::testing::TestWithParam<ConvCase> {};

TEST_P(Conv2dOracle, ForwardMatchesDirectLoops) {
  const auto c = GetParam();
  Rng rng(11);
  const auto u = [](int v) { return static_cast<std::size_t>(v); };
  const TensorD x = TensorD::randn({u(c.n), u(c.ci), u(c.h), u(c.h)}, rng);
  const TensorD w = TensorD::randn({u(c.co), u(c.ci), u(c.k), u(c.k)}, rng);
  const ConvSpec spec{c.k, c.p, c.s, 1};
  const TensorD got = conv2d(x, w, spec);
  const TensorD want = testing::naive_conv2d(x, w, c.k, c.p, c.s);
  ASSERT_EQ(got.shape(), want.shape());
  EXPECT_LT(max_abs_diff(got, want), 1e-12);
  const TensorF gotf = conv2d(x.cast<float>(), w.cast<float>(), spec);
  EXPECT_LT(max_abs_diff(gotf.cast<double>(), want), 1e-4);
}

TEST_P(Conv2dOracle, GradientsAreAdjoints) {
  const auto c = GetParam();
  Rng rng(12);
  const auto u = [](int v) { return static_cast<std::size_t>(v); };
  const TensorD x = TensorD::randn({u(c.n), u(c.ci), u(c.h), u(c.h)}, rng);
  const TensorD w = TensorD::randn({u(c.co), u(c.ci), u(c.k), u(c.k)}, rng);
  const ConvSpec spec{c.k, c.p, c.s, 1};
  const TensorD y = conv2d(x, w, spec);
  const TensorD g = TensorD::randn(y.shape(), rng);
  // <conv(x, w), g> = <x, dX(g)> = <w, dW(g)> by linearity in each argument.
  const double lhs = testing::dot(y, g);
  EXPECT_NEAR(testing::dot(x, conv2d_grad_input(g, w, x.shape(), spec)), lhs, 1e-9 * (1 + std::abs(lhs)));
  EXPECT_NEAR(testing::dot(w, conv2d_grad_kernel(x, g, w.shape(), spec)), lhs, 1e-9 * (1 + std::abs(lhs)));
}

INSTANTIATE_TEST_SUITE_P(Specs, Conv2dOracle,
                         ::testing::Values(ConvCase{2, 3, 4, 6, 3, 1, 1}, ConvCase{1, 2, 3, 7, 3, 1, 2},
                                           ConvCase{1, 2, 2, 8, 3, 1, 2}, ConvCase{2, 1, 2, 6, 4, 1, 1},
                                           ConvCase{1, 3, 2, 5, 1, 0, 1}, ConvCase{1, 1, 1, 9, 5, 2, 3}));

TEST(Conv2d, RejectsMismatchedChannelsAndDilation) {
  EXPECT_THROW(conv2d(TensorF({1, 2, 5, 5}), TensorF({1, 3, 3, 3}), {3, 1, 1, 1}), ShapeError);
  EXPECT_THROW(conv2d(TensorF({1, 1, 5, 5}), TensorF({1, 1, 3, 3}), {3, 1, 1, 2}), std::invalid_argument);
}

TEST(Elementwise, Values) {
  const TensorD x({4}, {-4.0, -1.0, 0.0, 2.0});
  EXPECT_EQ(relu(x).storage(), (std::vector<double>{0, 0, 0, 2}));
  const auto hs = hard_sigmoid(x);
  EXPECT_DOUBLE_EQ(hs[0], 0.0);
  EXPECT_DOUBLE_EQ(hs[1], 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(hs[2], 0.5);
  EXPECT_DOUBLE_EQ(silu(x)[3], 2.0 / (1.0 + std::exp(-2.0)));
  EXPECT_THROW(add(x, TensorD({3})), ShapeError);
}

TEST(Reductions, GlobalAvgPoolMatmulTranspose) {
  const TensorD x({1, 2, 2, 2}, {1, 2, 3, 4, 5, 6, 7, 8});
  EXPECT_EQ(global_avg_pool(x).storage(), (std::vector<double>{2.5, 6.5}));
  const TensorD a({2, 3}, {1, 2, 3, 4, 5, 6});
  const TensorD b({3, 2}, {7, 8, 9, 10, 11, 12});
  EXPECT_EQ(matmul(a, b).storage(), (std::vector<double>{58, 64, 139, 154}));
  EXPECT_EQ(transpose(a).storage(), (std::vector<double>{1, 4, 2, 5, 3, 6}));
}

TEST(Padding, CropInvertsPad) {
  Rng rng(5);
  const TensorF x = TensorF::randn({2, 3, 4, 5}, rng);
  const TensorF p = pad2d(x, 2);
  EXPECT_EQ(p.shape(), (Shape{2, 3, 8, 9}));
  EXPECT_EQ(p.at({0, 0, 0, 0}), 0.0f);
  EXPECT_TRUE(bitwise_equal(crop2d(p, 2), x));
}

TEST(Rng, DeterministicAndSplittable) {
  Rng a(42), b(42);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  const Rng root(7);
  Rng s1 = root.split(1), s1b = root.split(1), s2 = root.split(2);
  EXPECT_EQ(s1.next_u64(), s1b.next_u64());
  EXPECT_NE(root.split(1).next_u64(), s2.next_u64());
  double sum = 0, sq = 0;
  Rng n(9);
  for (int i = 0; i < 20000; ++i) {
    const double v = n.normal();
    sum += v;
    sq += v * v;
  }
  EXPECT_NEAR(sum / 20000, 0.0, 0.03);
  EXPECT_NEAR(sq / 20000, 1.0, 0.05);
  for (int i = 0; i < 1000; ++i) {
    const double u = n.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(n.below(7), 7u);
  }
}

}  // namespace
}  // namespace rotequiv

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "../support/oracles.hpp"
#include "../support/tiny_configs.hpp"
#include "rotequiv/harness/equiv_error.hpp"
#include "rotequiv/harness/gradcheck_suite.hpp"
#include "rotequiv/harness/mismatch.hpp"
#include "rotequiv/harness/report.hpp"
#include "rotequiv/harness/robustness.hpp"
#include "rotequiv/harness/strictness.hpp"
#include "rotequiv/model.hpp"

namespace rotequiv::harness {
namespace {

namespace fs = std::filesystem;

TEST(CompareFeatures, ClosedForm) {
  // One sample, four entries: d = (3, 0, 4, 0), reference norm 10.
  const TensorF a({1, 4}, {3, 1, 4, 2});
  const TensorF b({1, 4}, {0, 1, 0, 2});
  const TensorF ref({1, 4}, {6, 0, 8, 0});
  const auto e = compare_features(a, b, ref);
  EXPECT_DOUBLE_EQ(e.epsilon, 5.0 / 4.0);
  EXPECT_DOUBLE_EQ(e.normalized, 0.5);
  EXPECT_THROW(compare_features(a, TensorF({1, 3}), ref), ShapeError);
}

TEST(EquivError, ZeroForAnEquivariantMapAndScalesLinearly) {
  Rng rng(1);
  const CyclicGroup g(4);
  // Copying an image into every orientation channel is equivariant.
  const FeatureFn copies = [](const TensorF& t) {
    const std::size_t b = t.dim(0), hw = t.dim(2) * t.dim(3);
    TensorF out({b, 4, t.dim(2), t.dim(3)});
    for (std::size_t i = 0; i < b; ++i)
      for (std::size_t o = 0; o < 4; ++o)
        for (std::size_t j = 0; j < hw; ++j) out[(i * 4 + o) * hw + j] = t[i * hw + j];
    return out;
  };
  const TensorF img = TensorF::randn({2, 1, 6, 6}, rng);
  for (int q = 1; q < 4; ++q) EXPECT_EQ(equiv_error(copies, img, q, g).epsilon, 0.0);

  // Rotating a regular feature without rolling its orientations is not.
  const TensorF x = TensorF::randn({2, 4, 6, 6}, rng);
  const auto base = compare_features(rot90(x, 1), grid_act(x, 1, g), x);
  EXPECT_GT(base.normalized, 0.1);
  TensorF twice = x;
  for (float& v : twice.storage()) v *= 2.0f;
  const auto scaled = compare_features(rot90(twice, 1), grid_act(twice, 1, g), twice);
  EXPECT_NEAR(scaled.epsilon, 2.0 * base.epsilon, 1e-9 * base.epsilon);
  EXPECT_NEAR(scaled.normalized, base.normalized, 1e-9);
}

TEST(StagewiseError, StrictModelRowsAreSmall) {
  Rng rng(2);
  nn::Model<float> m(testing::small_config(4, 16), rng);
  const TensorF x = TensorF::randn({2, 1, 16, 16}, rng);
  const int angles[] = {90, 180, 270};
  const auto report = stagewise_error(m, x, angles);
  EXPECT_EQ(report.rows.size(), m.tap_names().size() * 3);
  EXPECT_LT(report.max_normalized(), 1e-5);
  EXPECT_EQ(report.model_fingerprint, model_fingerprint(m));
  // The measurement is deterministic.
  EXPECT_EQ(stagewise_error(m, x, angles).rows, report.rows);

  nn::Model<float> a(testing::small_config(4, 16, nn::DownsampleMode::approx), rng);
  EXPECT_GT(stagewise_error(a, x, angles).max_normalized("S0"), 1e-2);
  EXPECT_NE(model_fingerprint(a), model_fingerprint(m));
}

TEST(StagewiseError, PlainCnnIsBrokenEverywhere) {
  Rng rng(5);
  nn::Model<float> m(testing::small_config(1, 16), rng);
  const int angles[] = {90, 180, 270};
  const auto report = stagewise_error(m, TensorF::randn({2, 1, 16, 16}, rng), angles);
  for (const auto& stage : m.tap_names()) EXPECT_GT(report.max_normalized(stage), 1e-3) << stage;
}

TEST(StagewiseError, ApproxBreakagePersistsWithDepth) {
  auto cfg = nn::NetworkConfig::defaults();
  nn::set_downsample_mode(cfg, nn::DownsampleMode::approx);
  const int angles[] = {90, 180, 270};
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    Rng rng(seed);
    nn::Model<float> m(cfg, rng);
    const auto report = stagewise_error(m, TensorF::randn({2, 1, 64, 64}, rng), angles);
    bool broken = false;
    for (const auto& stage : m.tap_names()) {
      const bool now = report.max_normalized(stage) > 1e-3;
      EXPECT_TRUE(now || !broken) << stage << " recovered";
      broken = broken || now;
    }
    EXPECT_TRUE(broken);
  }
}

TEST(StagewiseError, AnglesMustBeQuarterTurns) {
  EXPECT_EQ(quarter_turns_for_angle(270), 3);
  EXPECT_EQ(quarter_turns_for_angle(-90), 3);
  EXPECT_EQ(quarter_turns_for_angle(0), 0);
  EXPECT_THROW(quarter_turns_for_angle(45), std::invalid_argument);
}

// Original-image positions read by an odd-lattice subsampling of the
// clockwise-rotated image, found by rotating an index image.
std::set<Point> pulled_back_samples(int n) {
  const int size = 2 * n;
  const auto s = static_cast<std::size_t>(size);
  TensorF idx({1, 1, s, s});
  for (std::size_t i = 0; i < s * s; ++i) idx[i] = static_cast<float>(i);
  const TensorF rotated = rot90(idx, 1);
  std::set<Point> out;
  for (int y = 1; y <= size; y += 2)
    for (int x = 1; x <= size; x += 2) {
      const auto id = static_cast<int>(rotated.at({0, 0, static_cast<std::size_t>(y - 1), static_cast<std::size_t>(x - 1)}));
      out.insert({id % size + 1, id / size + 1});
    }
  return out;
}

TEST(SamplingMismatch, SmallCases) {
  const auto one = sampling_mismatch_demo(1);
  EXPECT_EQ(one.pre, (std::vector<Point>{{1, 1}}));
  EXPECT_EQ(one.post, (std::vector<Point>{{1, 2}}));
  const auto two = sampling_mismatch_demo(2);
  EXPECT_EQ(two.pre, (std::vector<Point>{{1, 1}, {1, 3}, {3, 1}, {3, 3}}));
  EXPECT_EQ(two.post, (std::vector<Point>{{1, 4}, {3, 4}, {1, 2}, {3, 2}}));
  EXPECT_THROW(sampling_mismatch_demo(0), std::invalid_argument);
}

TEST(SamplingMismatch, MatchesRotatedIndexImageUpTo64) {
  for (int n = 1; n <= 64; ++n) {
    const auto d = sampling_mismatch_demo(n);
    ASSERT_EQ(d.pre.size(), static_cast<std::size_t>(n * n));
    const std::set<Point> post(d.post.begin(), d.post.end());
    EXPECT_EQ(post, pulled_back_samples(n)) << n;
    EXPECT_TRUE(d.pre_rows_odd);
    EXPECT_TRUE(d.post_rows_even);
    EXPECT_TRUE(d.disjoint);
    for (const auto& p : d.pre) EXPECT_EQ(post.count(p), 0u);
  }
}

TEST(Strictness, DefaultPassesApproxFlagsTheStem) {
  auto cfg = nn::NetworkConfig::defaults();
  const auto ok = check_strictness(cfg, 64);
  EXPECT_TRUE(ok.strict);
  EXPECT_EQ(ok.rows.size(), 18u);
  EXPECT_FALSE(ok.first_violation().has_value());
  for (const auto& r : ok.rows) EXPECT_TRUE(r.pass) << r.name;

  nn::set_downsample_mode(cfg, nn::DownsampleMode::approx);
  const auto bad = check_strictness(cfg, 64);
  EXPECT_FALSE(bad.strict);
  ASSERT_TRUE(bad.first_violation().has_value());
  const auto& r = bad.rows[*bad.first_violation()];
  EXPECT_EQ(r.name, "stem.downsample.down");
  EXPECT_EQ(r.padded_in, 66);
  EXPECT_EQ(r.k, 3);
  EXPECT_EQ(r.s, 2);
  EXPECT_EQ(r.residue, 1);
}

TEST(Strictness, OddChainsNeedNoTuning) {
  auto cfg = nn::NetworkConfig::defaults();
  nn::set_downsample_mode(cfg, nn::DownsampleMode::approx);
  cfg.input_size = 65;
  EXPECT_TRUE(check_strictness(cfg, 65).strict);
  cfg.input_size = 66;
  EXPECT_FALSE(check_strictness(cfg, 66).strict);
}

TEST(Strictness, ResidueMatchesBruteForceLattice) {
  for (int size = 9; size <= 40; ++size) {
    auto cfg = testing::small_config(4, size, nn::DownsampleMode::approx);
    const auto rep = check_strictness(cfg, size);
    for (const auto& r : rep.rows) {
      // A window grid of stride s covers [0, i) symmetrically iff the last
      // window ends exactly at i.
      const int windows = testing::brute_force_out_size(r.padded_in, r.k, 0, r.s);
      const int end = (windows - 1) * r.s + r.k;
      EXPECT_EQ(r.pass, end == r.padded_in) << size << " " << r.name;
    }
  }
}

TEST(RotateImages, QuarterTurnsAreExactAndOthersBilinear) {
  Rng rng(3);
  const TensorF x = TensorF::randn({2, 1, 7, 7}, rng);
  EXPECT_TRUE(bitwise_equal(rotate_images(x, 0.0), x));
  EXPECT_TRUE(bitwise_equal(rotate_images(x, 90.0), rot90(x, 1)));
  EXPECT_TRUE(bitwise_equal(rotate_images(x, 450.0), rot90(x, 1)));
  EXPECT_TRUE(bitwise_equal(rotate_images(x, -90.0), rot90(x, 3)));
  const TensorF r = rotate_images(x, 30.0);
  for (std::size_t b = 0; b < 2; ++b) {
    std::vector<double> plane(49);
    for (std::size_t i = 0; i < 49; ++i) plane[i] = x[b * 49 + i];
    const auto want = testing::naive_rotate_bilinear(plane, 7, 30.0);
    for (std::size_t i = 0; i < 49; ++i) EXPECT_NEAR(r[b * 49 + i], want[i], 1e-5);
  }
}

TEST(Robustness, EmptyAngleListGivesEmptyCurve) {
  Rng rng(4);
  nn::Model<float> m(testing::small_config(4, 16), rng);
  DatasetSpec spec;
  spec.n_train = 0;
  spec.n_test = 8;
  spec.image_size = 16;
  const auto d = gen_dataset(spec);
  EXPECT_TRUE(robustness_sweep(m, d.test, {}).empty());
  const double angles[] = {0.0, 90.0, 180.0, 270.0};
  const auto curve = robustness_sweep(m, d.test, angles);
  ASSERT_EQ(curve.size(), 4u);
  // A strict model predicts the same classes under quarter turns.
  for (const auto& row : curve) EXPECT_EQ(row.accuracy, curve[0].accuracy);
}

TEST(Reports, CsvHeadersAndRoundTrip) {
  EquivErrorReport eq;
  eq.rows = {{"S0", 90, 1.0 / 3.0, 2e-7}, {"head", 270, 0.0, 5.5}};
  const std::string eq_csv = to_csv(eq);
  EXPECT_EQ(eq_csv.substr(0, eq_csv.find('\n')), "stage,angle_deg,epsilon,epsilon_normalized");
  EXPECT_EQ(parse_equiv_csv(eq_csv).rows, eq.rows);
  EXPECT_EQ(to_csv(parse_equiv_csv(eq_csv)), eq_csv);

  const RobustnessCurve rc{{0.0, 1.0, 0.1}, {45.0, 0.75, 12.125}};
  EXPECT_EQ(to_csv(rc).substr(0, to_csv(rc).find('\n')), "angle_deg,accuracy,mean_angular_error_deg");
  EXPECT_EQ(parse_robustness_csv(to_csv(rc)), rc);

  TrainingHistory h;
  h.stages = {"S0", "S1"};
  h.epochs = {{0, 1.5, 0.25, 45.0, {1e-3, 0.7}}, {1, 0.1, 1.0, 2.0, {1e-7, 0.1}}};
  const std::string h_csv = to_csv(h);
  EXPECT_EQ(h_csv.substr(0, h_csv.find('\n')), "epoch,loss,accuracy,angular_error_deg,eps_S0,eps_S1");
  const auto back = parse_training_csv(h_csv);
  EXPECT_EQ(back.stages, h.stages);
  EXPECT_EQ(back.epochs, h.epochs);

  const auto st = check_strictness(nn::NetworkConfig::defaults(), 64);
  const std::string st_csv = to_csv(st);
  EXPECT_EQ(st_csv.substr(0, st_csv.find('\n')), "layer,name,padded_in,k,s,residue,verdict");
  EXPECT_EQ(parse_strictness_csv(st_csv).rows, st.rows);

  EXPECT_THROW(parse_equiv_csv("a,b,c,d\n"), std::runtime_error);
}

TEST(Reports, WriteTextCreatesDirectories) {
  const auto dir = fs::temp_directory_path() / "rotequiv_report_test";
  fs::remove_all(dir);
  write_text(dir / "a" / "b.csv", "x\n");
  EXPECT_EQ(read_text(dir / "a" / "b.csv"), "x\n");
  fs::remove_all(dir);
}

TEST(Reports, SvgPlotIsWellFormed) {
  const std::string svg = svg_line_plot("eps", "epoch", "error", {{"S0", {0, 1, 2}, {1.0, 0.1, 0.01}}}, true);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_NE(svg.find("S0"), std::string::npos);
}

TEST(GradcheckSuite, EveryOpPassesAtDefaultTolerance) {
  const auto rows = run_gradcheck("all", 3, 7);
  EXPECT_EQ(rows.size(), gradcheck_op_names().size());
  for (const auto& r : rows) EXPECT_TRUE(r.pass) << r.op << " " << r.max_rel_error;
  EXPECT_THROW(run_gradcheck("no_such_op"), std::invalid_argument);
}

}  // namespace
}  // namespace rotequiv::harness

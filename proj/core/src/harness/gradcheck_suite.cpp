// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#include "rotequiv/harness/gradcheck_suite.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <numeric>
#include <stdexcept>

#include "rotequiv/gradcheck.hpp"
#include "rotequiv/model.hpp"

namespace rotequiv::harness {

namespace {

using ad::Var;
using VarD = Var<double>;
using nn::ConvKind;

struct Case {
  TensorD input;
  ad::UnaryOpD op;
};

using Builder = std::function<Case(Rng&)>;

TensorD randn(Shape s, Rng& rng) { return TensorD::randn(std::move(s), rng); }

// Values bounded away from zero.
TensorD away_from_zero(Shape s, Rng& rng) {
  TensorD t = randn(std::move(s), rng);
  for (std::size_t i = 0; i < t.numel(); ++i) t[i] = (t[i] < 0 ? -1.0 : 1.0) * (0.1 + std::abs(t[i]));
  return t;
}

// Distinct values with gaps far above the finite-difference step, so max
// selections are stable under perturbation.
TensorD well_separated(Shape s, Rng& rng) {
  TensorD t(std::move(s));
  std::vector<std::size_t> order(t.numel());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order.begin(), order.end());
  for (std::size_t i = 0; i < t.numel(); ++i) {
    t[i] = 0.05 * (static_cast<double>(order[i]) - t.numel() / 2.0) + rng.uniform(-0.01, 0.01);
  }
  return t;
}

Case unary(Shape s, Rng& rng, std::function<VarD(const VarD&)> f) { return {randn(std::move(s), rng), std::move(f)}; }

template <class Layer>
std::shared_ptr<Layer> share(Layer&& l) {
  return std::make_shared<Layer>(std::move(l));
}

const std::vector<std::pair<std::string, Builder>>& registry() {
  static const std::vector<std::pair<std::string, Builder>> cases = [] {
    std::vector<std::pair<std::string, Builder>> c;
    const ConvSpec same{3, 1, 1, 1};

    c.emplace_back("add", [](Rng& r) {
      const VarD k(randn({2, 3, 4}, r));
      return unary({2, 3, 4}, r, [k](const VarD& x) { return ad::add(x, k); });
    });
    c.emplace_back("sub", [](Rng& r) {
      const VarD k(randn({2, 3, 4}, r));
      return unary({2, 3, 4}, r, [k](const VarD& x) { return ad::sub(k, x); });
    });
    c.emplace_back("mul", [](Rng& r) {
      const VarD k(randn({2, 3, 4}, r));
      return unary({2, 3, 4}, r, [k](const VarD& x) { return ad::mul(ad::mul(x, k), x); });
    });
    c.emplace_back("scale", [](Rng& r) { return unary({2, 5}, r, [](const VarD& x) { return ad::scale(x, -1.7); }); });
    c.emplace_back("silu", [](Rng& r) { return unary({3, 7}, r, [](const VarD& x) { return ad::silu(x); }); });
    c.emplace_back("relu", [](Rng& r) {
      return Case{away_from_zero({3, 7}, r), [](const VarD& x) { return ad::relu(x); }};
    });
    c.emplace_back("hard_sigmoid", [](Rng& r) {
      return Case{TensorD::uniform({3, 7}, r, -2.9, 2.9), [](const VarD& x) { return ad::hard_sigmoid(x); }};
    });
    c.emplace_back("sum", [](Rng& r) { return unary({2, 3, 4}, r, [](const VarD& x) { return ad::sum(x); }); });
    c.emplace_back("mean", [](Rng& r) { return unary({2, 3, 4}, r, [](const VarD& x) { return ad::mean(x); }); });
    c.emplace_back("reshape", [](Rng& r) {
      const VarD k(randn({6, 4}, r));
      return unary({2, 3, 4}, r, [k](const VarD& x) { return ad::mul(ad::reshape(x, {6, 4}), k); });
    });
    c.emplace_back("matmul_lhs", [](Rng& r) {
      const VarD b(randn({4, 5}, r));
      return unary({3, 4}, r, [b](const VarD& x) { return ad::matmul(x, b); });
    });
    c.emplace_back("matmul_rhs", [](Rng& r) {
      const VarD a(randn({3, 4}, r));
      return unary({4, 5}, r, [a](const VarD& x) { return ad::matmul(a, x); });
    });
    c.emplace_back("linear_input", [](Rng& r) {
      const VarD w(randn({3, 5}, r)), b(randn({3}, r));
      return unary({2, 5}, r, [w, b](const VarD& x) { return ad::linear(x, w, b); });
    });
    c.emplace_back("linear_weight", [](Rng& r) {
      const VarD x(randn({2, 5}, r)), b(randn({3}, r));
      return unary({3, 5}, r, [x, b](const VarD& w) { return ad::linear(x, w, b); });
    });
    c.emplace_back("linear_bias", [](Rng& r) {
      const VarD x(randn({2, 5}, r)), w(randn({3, 5}, r));
      return unary({3}, r, [x, w](const VarD& b) { return ad::linear(x, w, b); });
    });
    c.emplace_back("conv2d_input", [same](Rng& r) {
      const VarD k(randn({3, 2, 3, 3}, r));
      return unary({2, 2, 5, 5}, r, [k, same](const VarD& x) { return ad::conv2d(x, k, same); });
    });
    c.emplace_back("conv2d_kernel", [same](Rng& r) {
      const VarD x(randn({2, 2, 5, 5}, r));
      return unary({3, 2, 3, 3}, r, [x, same](const VarD& k) { return ad::conv2d(x, k, same); });
    });
    c.emplace_back("conv2d_stride2_input", [](Rng& r) {
      const VarD k(randn({2, 2, 3, 3}, r));
      return unary({1, 2, 7, 7}, r, [k](const VarD& x) { return ad::conv2d(x, k, kDownSpec); });
    });
    c.emplace_back("conv2d_tuning_kernel", [](Rng& r) {
      const VarD x(randn({1, 2, 6, 6}, r));
      return unary({2, 2, 4, 4}, r, [x](const VarD& k) { return ad::conv2d(x, k, kTuningSpec); });
    });
    c.emplace_back("add_channel_bias", [](Rng& r) {
      const VarD x(randn({2, 3, 2, 2}, r));
      return unary({3}, r, [x](const VarD& b) { return ad::mul(ad::add_channel_bias(x, b), x); });
    });
    c.emplace_back("channel_scale_input", [](Rng& r) {
      const VarD s(randn({2, 3}, r));
      return unary({2, 3, 2, 2}, r, [s](const VarD& x) { return ad::channel_scale(x, s); });
    });
    c.emplace_back("channel_scale_gate", [](Rng& r) {
      const VarD x(randn({2, 3, 2, 2}, r));
      return unary({2, 3}, r, [x](const VarD& s) { return ad::channel_scale(x, s); });
    });
    c.emplace_back("global_avg_pool", [](Rng& r) {
      return unary({2, 3, 3, 3}, r, [](const VarD& x) { return ad::global_avg_pool(x); });
    });
    c.emplace_back("pad2d", [](Rng& r) { return unary({1, 2, 3, 3}, r, [](const VarD& x) { return ad::pad2d(x, 1); }); });
    c.emplace_back("repeat_interleave", [](Rng& r) {
      const VarD k(randn({2, 9}, r));
      return unary({2, 3}, r, [k](const VarD& x) { return ad::mul(ad::repeat_interleave(x, 3), k); });
    });
    c.emplace_back("channel_slice", [](Rng& r) {
      return unary({2, 5, 2, 2}, r, [](const VarD& x) { return ad::channel_slice(x, 1, 3); });
    });
    c.emplace_back("channel_concat", [](Rng& r) {
      const VarD other(randn({2, 2, 2, 2}, r));
      return unary({2, 3, 2, 2}, r, [other](const VarD& x) {
        const VarD parts[] = {other, x, ad::scale(x, 2.0)};
        return ad::channel_concat<double>(parts);
      });
    });
    c.emplace_back("channel_permute", [](Rng& r) {
      return unary({2, 4, 2, 2}, r, [](const VarD& x) {
        const std::size_t perm[] = {2, 0, 3, 1};
        return ad::channel_permute<double>(x, perm);
      });
    });
    c.emplace_back("group_mean", [](Rng& r) {
      return unary({2, 8}, r, [](const VarD& x) { return ad::group_mean(x, 4); });
    });
    c.emplace_back("cross_entropy", [](Rng& r) {
      return unary({3, 4}, r, [](const VarD& x) {
        const int labels[] = {0, 3, 2};
        return ad::cross_entropy<double>(x, labels);
      });
    });
    c.emplace_back("rotate_kernel_quarter", [](Rng& r) {
      return unary({2, 3, 3, 3}, r, [](const VarD& k) { return rotate_kernel(k, 1, CyclicGroup(4)); });
    });
    c.emplace_back("rotate_kernel_residual", [](Rng& r) {
      return unary({2, 3, 3, 3}, r, [](const VarD& k) { return rotate_kernel(k, 3, CyclicGroup(8)); });
    });
    c.emplace_back("expand_lift", [](Rng& r) {
      return unary({2, 1, 3, 3}, r, [](const VarD& k) { return expand_lift(k, CyclicGroup(4)); });
    });
    c.emplace_back("expand_group", [](Rng& r) {
      return unary({2, 4, 3, 3}, r, [](const VarD& k) { return expand_group(k, CyclicGroup(4)); });
    });
    c.emplace_back("lift_conv_weight", [same](Rng& r) {
      auto conv = share(nn::EquivConv<double>(ConvKind::lift, 1, 2, same, CyclicGroup(4), r));
      const VarD x(randn({1, 1, 5, 5}, r));
      return Case{conv->weight().value(), [conv, x](const VarD& w) {
                    conv->weight() = w;
                    return conv->forward(x);
                  }};
    });
    c.emplace_back("group_conv_input", [same](Rng& r) {
      auto conv = share(nn::EquivConv<double>(ConvKind::group, 1, 2, same, CyclicGroup(4), r));
      return unary({1, 4, 4, 4}, r, [conv](const VarD& x) { return conv->forward(x); });
    });
    c.emplace_back("group_conv_weight", [same](Rng& r) {
      auto conv = share(nn::EquivConv<double>(ConvKind::group, 1, 2, same, CyclicGroup(4), r));
      const VarD x(randn({1, 4, 4, 4}, r));
      return Case{conv->weight().value(), [conv, x](const VarD& w) {
                    conv->weight() = w;
                    return conv->forward(x);
                  }};
    });
    c.emplace_back("group_conv_bias", [same](Rng& r) {
      auto conv = share(nn::EquivConv<double>(ConvKind::group, 1, 2, same, CyclicGroup(4), r));
      const VarD x(randn({1, 4, 3, 3}, r)), k(randn({1, 8, 3, 3}, r));
      return Case{randn({2}, r), [conv, x, k](const VarD& b) {
                    conv->bias() = b;
                    return ad::mul(conv->forward(x), k);
                  }};
    });
    c.emplace_back("batchnorm_train_input", [](Rng& r) {
      auto bn = share(nn::EquivBatchNorm<double>(8, CyclicGroup(4)));
      bn->gamma() = VarD::parameter(TensorD::uniform({2}, r, 0.5, 1.5));
      return unary({2, 8, 2, 2}, r, [bn](const VarD& x) { return bn->forward(x, true); });
    });
    c.emplace_back("batchnorm_train_affine", [](Rng& r) {
      auto bn = share(nn::EquivBatchNorm<double>(8, CyclicGroup(4)));
      const VarD x(randn({2, 8, 2, 2}, r)), k(randn({2, 8, 2, 2}, r));
      return unary({2}, r, [bn, x, k](const VarD& g) {
        bn->gamma() = g;
        return ad::mul(bn->forward(x, true), k);
      });
    });
    c.emplace_back("batchnorm_eval_input", [](Rng& r) {
      auto bn = share(nn::EquivBatchNorm<double>(8, CyclicGroup(4)));
      (void)bn->forward(VarD(randn({2, 8, 2, 2}, r)), true);
      return unary({2, 8, 2, 2}, r, [bn](const VarD& x) { return bn->forward(x, false); });
    });
    c.emplace_back("batchnorm_per_channel_input", [](Rng& r) {
      auto bn = share(nn::EquivBatchNorm<double>(8, CyclicGroup(4), nn::NormLayout::per_channel));
      return unary({2, 8, 2, 2}, r, [bn](const VarD& x) { return bn->forward(x, true); });
    });
    c.emplace_back("conv_module_input", [same](Rng& r) {
      auto m = share(nn::ConvModule<double>(ConvKind::group, 1, 1, same, CyclicGroup(4), r));
      return unary({2, 4, 3, 3}, r, [m](const VarD& x) { return m->forward(x, true); });
    });
    c.emplace_back("downsample_strict_input", [](Rng& r) {
      auto m = share(nn::DownsampleBlock<double>(nn::DownsampleMode::strict, 1, 1, 4, CyclicGroup(4), r));
      return unary({2, 4, 4, 4}, r, [m](const VarD& x) { return m->forward(x, true); });
    });
    c.emplace_back("downsample_approx_input", [](Rng& r) {
      auto m = share(nn::DownsampleBlock<double>(nn::DownsampleMode::approx, 1, 1, 4, CyclicGroup(4), r));
      return unary({2, 4, 4, 4}, r, [m](const VarD& x) { return m->forward(x, true); });
    });
    c.emplace_back("attention_input", [](Rng& r) {
      auto a = share(nn::ChannelAttention<double>(8, CyclicGroup(4), r));
      return unary({2, 8, 2, 2}, r, [a](const VarD& x) { return a->forward(x); });
    });
    c.emplace_back("attention_naive_input", [](Rng& r) {
      auto a = share(nn::ChannelAttention<double>(8, CyclicGroup(4), r, true));
      return unary({2, 8, 2, 2}, r, [a](const VarD& x) { return a->forward(x); });
    });
    c.emplace_back("orientation_pool_mean", [](Rng& r) {
      return unary({2, 8, 2, 2}, r, [](const VarD& x) { return orientation_pool(x, CyclicGroup(4), nn::PoolKind::mean); });
    });
    c.emplace_back("orientation_pool_max", [](Rng& r) {
      return Case{well_separated({2, 8, 2, 2}, r),
                  [](const VarD& x) { return orientation_pool(x, CyclicGroup(4), nn::PoolKind::max); }};
    });
    c.emplace_back("rearrange_merge", [](Rng& r) {
      return unary({2, 8, 2, 2}, r, [](const VarD& x) {
        const CyclicGroup g(4);
        auto parts = nn::rearrange_by_orientation(x, g);
        for (std::size_t i = 0; i < parts.size(); ++i) parts[i] = ad::scale(parts[i], 1.0 + static_cast<double>(i));
        return nn::merge_orientation_groups<double>(parts, g);
      });
    });
    c.emplace_back("orientation_angle", [](Rng& r) {
      return unary({3, 8}, r, [](const VarD& s) { return nn::orientation_angle(s, CyclicGroup(8)); });
    });
    c.emplace_back("angular_loss", [](Rng& r) {
      std::vector<double> target{r.uniform(0, 6.28), r.uniform(0, 6.28), r.uniform(0, 6.28), r.uniform(0, 6.28)};
      return Case{TensorD::uniform({4}, r, -3.0, 3.0), [target](const VarD& p) {
                    const int m[] = {1, 2, 1, 2};
                    return nn::angular_loss<double>(p, target, m);
                  }};
    });
    c.emplace_back("branch_module_input", [](Rng& r) {
      auto b = share(nn::BranchModule<double>(2, 2, CyclicGroup(4), r));
      return unary({2, 8, 3, 3}, r, [b](const VarD& x) { return b->forward(x, true); });
    });
    auto tiny = [] {
      nn::NetworkConfig cfg;
      cfg.orientations = 4;
      cfg.input_size = 8;
      cfg.stem.channels = 4;
      cfg.stages = {nn::StageConfig{8, 1, nn::DownsampleMode::strict, true}};
      cfg.head = {2, 2};
      cfg.task.num_classes = 2;
      return cfg;
    };
    c.emplace_back("model_logits", [tiny](Rng& r) {
      auto m = std::make_shared<nn::Model<double>>(tiny(), r);
      return unary({2, 1, 8, 8}, r, [m](const VarD& x) { return m->forward(x, true).class_logits; });
    });
    c.emplace_back("model_angle", [tiny](Rng& r) {
      auto m = std::make_shared<nn::Model<double>>(tiny(), r);
      return unary({2, 1, 8, 8}, r, [m](const VarD& x) { return m->forward(x, true).angle; });
    });
    return c;
  }();
  return cases;
}

}  // namespace

std::vector<std::string> gradcheck_op_names() {
  std::vector<std::string> out;
  for (const auto& [name, b] : registry()) out.push_back(name);
  return out;
}

std::vector<GradCheckRow> run_gradcheck(const std::string& op, int points, std::uint64_t seed, double step,
                                        double tolerance) {
  if (points < 1) throw std::invalid_argument("gradcheck needs at least one point");
  const auto& cases = registry();
  if (op != "all" && std::none_of(cases.begin(), cases.end(), [&](const auto& c) { return c.first == op; })) {
    throw std::invalid_argument("unknown gradcheck op '" + op + "'");
  }
  std::vector<GradCheckRow> rows;
  const Rng root(seed);
  for (std::size_t ci = 0; ci < cases.size(); ++ci) {
    const auto& [name, build] = cases[ci];
    if (op != "all" && op != name) continue;
    GradCheckRow row{name, points, 0.0, true};
    for (int p = 0; p < points; ++p) {
      Rng rng = root.split((static_cast<std::uint64_t>(ci) << 16) + static_cast<std::uint64_t>(p));
      const Case c = build(rng);
      const auto res = ad::finite_diff_check(c.op, c.input, step, rng);
      row.max_rel_error = std::max(row.max_rel_error, res.max_rel_error);
    }
    row.pass = row.max_rel_error <= tolerance;
    rows.push_back(row);
  }
  return rows;
}

std::string to_csv(const std::vector<GradCheckRow>& rows) {
  std::string out = "op,points,max_rel_error,verdict\n";
  for (const auto& r : rows) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", r.max_rel_error);
    out += r.op + "," + std::to_string(r.points) + "," + buf + "," + (r.pass ? "pass" : "fail") + "\n";
  }
  return out;
}

}  // namespace rotequiv::harness

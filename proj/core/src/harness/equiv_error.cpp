// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#include "rotequiv/harness/equiv_error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

namespace rotequiv::harness {

EquivError compare_features(const TensorF& rotated_first, const TensorF& rotated_after, const TensorF& reference) {
  if (rotated_first.shape() != rotated_after.shape() || rotated_first.shape() != reference.shape() ||
      rotated_first.rank() < 2) {
    throw ShapeError("equivariance error: shape mismatch " + shape_str(rotated_first.shape()) + " vs " +
                     shape_str(rotated_after.shape()));
  }
  const std::size_t b = rotated_first.dim(0);
  const std::size_t per = rotated_first.numel() / b;
  EquivError out;
  for (std::size_t i = 0; i < b; ++i) {
    double d2 = 0.0, f2 = 0.0;
    for (std::size_t j = 0; j < per; ++j) {
      const double d = static_cast<double>(rotated_first[i * per + j]) - rotated_after[i * per + j];
      d2 += d * d;
      f2 += static_cast<double>(reference[i * per + j]) * reference[i * per + j];
    }
    const double norm = std::sqrt(d2);
    out.epsilon += norm / static_cast<double>(per);
    out.normalized += f2 > 0.0 ? norm / std::sqrt(f2) : (d2 > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  }
  out.epsilon /= static_cast<double>(b);
  out.normalized /= static_cast<double>(b);
  return out;
}

EquivError equiv_error(const FeatureFn& f, const TensorF& x, int quarter_turns, const CyclicGroup& group) {
  const TensorF fx = f(x);
  const TensorF ftx = f(rot90(x, quarter_turns));
  return compare_features(ftx, grid_act(fx, quarter_turns, group), fx);
}

double EquivErrorReport::max_normalized(const std::string& stage) const {
  double m = 0.0;
  for (const auto& r : rows) {
    if (stage.empty() || r.stage == stage) m = std::max(m, r.normalized);
  }
  return m;
}

int quarter_turns_for_angle(int angle_deg) {
  if (angle_deg % 90 != 0) {
    throw std::invalid_argument("equivariance error is defined only for multiples of 90 degrees, got " +
                                std::to_string(angle_deg));
  }
  return ((angle_deg / 90) % 4 + 4) % 4;
}

EquivErrorReport stagewise_error(nn::Model<float>& model, const TensorF& inputs, std::span<const int> angles_deg) {
  ad::NoGradGuard no_grad;
  EquivErrorReport report;
  report.input_descriptor = "batch " + shape_str(inputs.shape());
  report.model_fingerprint = model_fingerprint(model);
  const auto base = model.forward(ad::Var<float>(inputs), false);
  for (const int angle : angles_deg) {
    const int q = quarter_turns_for_angle(angle);
    const auto turned = model.forward(ad::Var<float>(rot90(inputs, q)), false);
    for (std::size_t t = 0; t < base.taps.size(); ++t) {
      const TensorF& fx = base.taps[t].second.value();
      const auto e = compare_features(turned.taps[t].second.value(), grid_act(fx, q, model.group()), fx);
      report.rows.push_back({base.taps[t].first, angle, e.epsilon, e.normalized});
    }
  }
  return report;
}

std::string model_fingerprint(nn::Model<float>& model) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  auto reg = model.registry();
  for (const auto& p : reg.params) {
    mix(p.name.data(), p.name.size());
    mix(p.var.value().ptr(), p.var.value().numel() * sizeof(float));
  }
  for (const auto& b : reg.buffers) {
    mix(b.name.data(), b.name.size());
    mix(b.tensor->ptr(), b.tensor->numel() * sizeof(float));
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace rotequiv::harness

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#include "rotequiv/harness/robustness.hpp"

#include <cmath>
#include <numbers>

#include "rotequiv/harness/train.hpp"

namespace rotequiv::harness {

TensorF rotate_images(const TensorF& images, double angle_deg) {
  if (images.rank() != 4) throw ShapeError("rotate_images: expected NCHW, got " + shape_str(images.shape()));
  const double turns = angle_deg / 90.0;
  if (turns == std::floor(turns)) {
    return rot90(images, static_cast<int>(std::fmod(turns, 4.0)));
  }
  const std::size_t planes = images.dim(0) * images.dim(1), h = images.dim(2), w = images.dim(3);
  const double cy = (static_cast<double>(h) - 1) / 2.0, cx = (static_cast<double>(w) - 1) / 2.0;
  const double rad = angle_deg * std::numbers::pi / 180.0;
  const double c = std::cos(rad), s = std::sin(rad);
  TensorF out(images.shape());
  for (std::size_t pl = 0; pl < planes; ++pl) {
    const float* src = images.ptr() + pl * h * w;
    float* dst = out.ptr() + pl * h * w;
    auto at = [&](long r, long q) -> double {
      if (r < 0 || q < 0 || r >= static_cast<long>(h) || q >= static_cast<long>(w)) return 0.0;
      return src[static_cast<std::size_t>(r) * w + static_cast<std::size_t>(q)];
    };
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t q = 0; q < w; ++q) {
        // Inverse of a clockwise rotation (y axis pointing down).
        const double x = static_cast<double>(q) - cx, y = static_cast<double>(r) - cy;
        const double sx = c * x + s * y + cx, sy = -s * x + c * y + cy;
        const double fx = std::floor(sx), fy = std::floor(sy);
        const double ax = sx - fx, ay = sy - fy;
        const long x0 = static_cast<long>(fx), y0 = static_cast<long>(fy);
        const double v = (1 - ay) * ((1 - ax) * at(y0, x0) + ax * at(y0, x0 + 1)) +
                         ay * ((1 - ax) * at(y0 + 1, x0) + ax * at(y0 + 1, x0 + 1));
        dst[r * w + q] = static_cast<float>(v);
      }
    }
  }
  return out;
}

RobustnessCurve robustness_sweep(nn::Model<float>& model, const Split& test, std::span<const double> angles_deg,
                                 int batch) {
  RobustnessCurve curve;
  for (const double angle : angles_deg) {
    const auto pred = predict(model, rotate_images(test.images, angle), batch);
    std::size_t correct = 0;
    double err = 0.0;
    for (std::size_t i = 0; i < test.size(); ++i) {
      if (pred.classes[i] == test.labels[i]) ++correct;
      const int m = symmetry_order(static_cast<ShapeKind>(test.labels[i]));
      err += angular_difference_deg(pred.angle_deg[i], test.theta_deg[i] + angle, m);
    }
    const double n = static_cast<double>(std::max<std::size_t>(test.size(), 1));
    curve.push_back({angle, static_cast<double>(correct) / n, err / n});
  }
  return curve;
}

}  // namespace rotequiv::harness

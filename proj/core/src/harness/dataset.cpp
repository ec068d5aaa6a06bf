// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#include "rotequiv/harness/dataset.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <numbers>
#include <stdexcept>

namespace rotequiv::harness {

namespace {

constexpr int kSuper = 4;
constexpr std::uint64_t kTestStream = 1ULL << 40;

bool inside_triangle(double u, double v, double r) {
  // Apex on +u, base on the left.
  const double ax = r, ay = 0.0, bx = -0.6 * r, by = 0.6 * r, cx = -0.6 * r, cy = -0.6 * r;
  auto edge = [&](double x0, double y0, double x1, double y1) { return (x1 - x0) * (v - y0) - (y1 - y0) * (u - x0); };
  const double e0 = edge(ax, ay, bx, by), e1 = edge(bx, by, cx, cy), e2 = edge(cx, cy, ax, ay);
  return (e0 >= 0 && e1 >= 0 && e2 >= 0) || (e0 <= 0 && e1 <= 0 && e2 <= 0);
}

bool inside(ShapeKind kind, double u, double v, double r) {
  switch (kind) {
    case ShapeKind::bar:
      return std::abs(u) <= r && std::abs(v) <= 0.25 * r;
    case ShapeKind::ellipse:
      return (u * u) / (r * r) + (v * v) / (0.25 * r * r) <= 1.0;
    case ShapeKind::triangle:
      return inside_triangle(u, v, r);
    case ShapeKind::lshape: {
      const bool foot = u >= -0.6 * r && u <= r && v >= -0.6 * r && v <= -0.2 * r;
      const bool leg = u >= -0.6 * r && u <= -0.2 * r && v >= -0.6 * r && v <= r;
      return foot || leg;
    }
  }
  return false;
}

}  // namespace

std::string to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::bar: return "bar";
    case ShapeKind::ellipse: return "ellipse";
    case ShapeKind::triangle: return "triangle";
    case ShapeKind::lshape: return "lshape";
  }
  return "?";
}

int symmetry_order(ShapeKind kind) {
  return kind == ShapeKind::bar || kind == ShapeKind::ellipse ? 2 : 1;
}

void DatasetSpec::validate() const {
  if (n_train < 0 || n_test < 0) throw std::invalid_argument("dataset sizes must be non-negative");
  if (image_size < 8) throw std::invalid_argument("image_size must be >= 8");
  if (!(noise_std >= 0.0)) throw std::invalid_argument("noise_std must be >= 0");
  if (!(angle_range_deg > 0.0 && angle_range_deg <= 360.0)) {
    throw std::invalid_argument("angle_range_deg must lie in (0, 360]");
  }
  if (!(center_jitter >= 0.0)) throw std::invalid_argument("center_jitter must be >= 0");
  if (!(min_scale > 0.0 && min_scale <= 1.0)) throw std::invalid_argument("min_scale must lie in (0, 1]");
}

TensorF render_shape(const RenderParams& p, int image_size) {
  const double c = (image_size - 1) / 2.0;
  const double r = 0.35 * image_size * p.scale;
  // theta = q * 90 + residual. The residual is applied with trigonometry and
  // the quarter turns by exact coordinate swaps, so centred renderings at
  // theta and theta + 90 sample identical local points.
  double q_real = std::floor(p.theta_deg / 90.0);
  double residual = p.theta_deg - 90.0 * q_real;
  if (residual >= 90.0) {
    residual -= 90.0;
    q_real += 1.0;
  }
  const int q = static_cast<int>(((static_cast<long long>(q_real) % 4) + 4) % 4);
  const double rad = residual * std::numbers::pi / 180.0;
  const double cr = std::cos(rad), sr = std::sin(rad);
  const auto s = static_cast<std::size_t>(image_size);
  TensorF out({1, 1, s, s});
  for (int row = 0; row < image_size; ++row) {
    for (int col = 0; col < image_size; ++col) {
      int count = 0;
      for (int sy = 0; sy < kSuper; ++sy) {
        for (int sx = 0; sx < kSuper; ++sx) {
          double x = col - c - p.dx + (sx + 0.5) / kSuper - 0.5;
          double y = row - c - p.dy + (sy + 0.5) / kSuper - 0.5;
          // Undo q clockwise quarter turns: (x, y) -> (y, -x) each.
          for (int t = 0; t < q; ++t) {
            const double nx = y, ny = -x;
            x = nx;
            y = ny;
          }
          // Undo the clockwise residual rotation.
          const double u = cr * x + sr * y;
          const double v = -sr * x + cr * y;
          count += inside(p.kind, u, v, r) ? 1 : 0;
        }
      }
      out[static_cast<std::size_t>(row) * s + static_cast<std::size_t>(col)] =
          static_cast<float>(count) / static_cast<float>(kSuper * kSuper);
    }
  }
  return out;
}

Split Split::gather(std::span<const std::size_t> indices) const {
  Split out;
  if (indices.empty()) return out;
  const std::size_t per = size() ? images.numel() / size() : 0;
  Shape shape = images.shape();
  shape[0] = indices.size();
  out.images = TensorF(shape);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const std::size_t src = indices[i];
    if (src >= size()) throw std::out_of_range("Split::gather: index out of range");
    std::memcpy(out.images.ptr() + i * per, images.ptr() + src * per, per * sizeof(float));
    out.labels.push_back(labels[src]);
    out.theta_deg.push_back(theta_deg[src]);
  }
  return out;
}

namespace {

Split make_split(const DatasetSpec& spec, int n, std::uint64_t stream_base) {
  const auto s = static_cast<std::size_t>(spec.image_size);
  Split split;
  if (n == 0) return split;
  split.images = TensorF({static_cast<std::size_t>(n), 1, s, s});
  const Rng root(spec.seed);
  for (int i = 0; i < n; ++i) {
    Rng rng = root.split(stream_base + static_cast<std::uint64_t>(i));
    RenderParams p;
    p.kind = static_cast<ShapeKind>(i % kNumShapeKinds);
    p.theta_deg = rng.uniform(0.0, spec.angle_range_deg);
    if (p.theta_deg >= 360.0) p.theta_deg = 0.0;
    p.dx = rng.uniform(-spec.center_jitter, spec.center_jitter);
    p.dy = rng.uniform(-spec.center_jitter, spec.center_jitter);
    p.scale = rng.uniform(spec.min_scale, 1.0);
    const TensorF img = render_shape(p, spec.image_size);
    float* dst = split.images.ptr() + static_cast<std::size_t>(i) * s * s;
    for (std::size_t k = 0; k < s * s; ++k) {
      dst[k] = img[k] + static_cast<float>(spec.noise_std * rng.normal());
    }
    split.labels.push_back(static_cast<int>(p.kind));
    split.theta_deg.push_back(static_cast<float>(p.theta_deg));
  }
  return split;
}

}  // namespace

Dataset gen_dataset(const DatasetSpec& spec) {
  spec.validate();
  Dataset d;
  d.spec = spec;
  d.train = make_split(spec, spec.n_train, 0);
  d.test = make_split(spec, spec.n_test, kTestStream);
  return d;
}

std::vector<int> symmetry_orders(std::span<const int> labels) {
  std::vector<int> out;
  out.reserve(labels.size());
  for (int l : labels) out.push_back(symmetry_order(static_cast<ShapeKind>(l)));
  return out;
}

double angular_difference_deg(double pred_deg, double target_deg, int symmetry) {
  const double period = 360.0 / symmetry;
  double d = std::fmod(pred_deg - target_deg, period);
  if (d < 0) d += period;
  return std::min(d, period - d);
}

}  // namespace rotequiv::harness

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#include "rotequiv/tensor_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace rotequiv {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return os;
}

}  // namespace

void write_pgm(const std::filesystem::path& path, const TensorF& image) {
  if (image.rank() < 2) throw ShapeError("write_pgm: rank must be >= 2");
  const std::size_t h = image.dim(image.rank() - 2);
  const std::size_t w = image.dim(image.rank() - 1);
  if (image.numel() != h * w) throw ShapeError("write_pgm: expected a single plane, got " + shape_str(image.shape()));
  const auto [lo_it, hi_it] = std::minmax_element(image.data().begin(), image.data().end());
  const float lo = *lo_it;
  const float range = *hi_it - lo;
  auto os = open_out(path);
  os << "P2\n" << w << ' ' << h << "\n255\n";
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const float v = range > 0.0f ? (image[r * w + c] - lo) / range : 0.0f;
      os << (c ? " " : "") << static_cast<int>(std::lround(v * 255.0f));
    }
    os << '\n';
  }
}

TensorF read_pgm(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::string magic;
  is >> magic;
  if (magic != "P2") throw std::runtime_error(path.string() + ": not a plain PGM (P2)");
  auto next_int = [&]() {
    is >> std::ws;
    while (is.peek() == '#') {
      std::string comment;
      std::getline(is, comment);
      is >> std::ws;
    }
    long v = -1;
    if (!(is >> v)) throw std::runtime_error(path.string() + ": truncated PGM");
    return v;
  };
  const long w = next_int(), h = next_int(), maxval = next_int();
  if (w <= 0 || h <= 0 || maxval <= 0) throw std::runtime_error(path.string() + ": bad PGM header");
  TensorF out({1, 1, static_cast<std::size_t>(h), static_cast<std::size_t>(w)});
  for (std::size_t i = 0; i < out.numel(); ++i) {
    out[i] = static_cast<float>(next_int()) / static_cast<float>(maxval);
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const TensorF& matrix) {
  if (matrix.rank() > 2) throw ShapeError("write_csv: rank must be <= 2");
  const std::size_t cols = matrix.dim(matrix.rank() - 1);
  const std::size_t rows = matrix.numel() / cols;
  auto os = open_out(path);
  os.precision(9);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) os << (c ? "," : "") << matrix[r * cols + c];
    os << '\n';
  }
}

}  // namespace rotequiv

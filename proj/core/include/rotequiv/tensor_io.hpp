// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#pragma once

#include <filesystem>
#include <string>

#include "rotequiv/tensor.hpp"

namespace rotequiv {

/// Writes the last two axes of `image` (all leading extents must be 1) as a
/// plain-text P2 PGM, min-max scaled to 0..255.
void write_pgm(const std::filesystem::path& path, const TensorF& image);

/// Reads a P2 PGM into a [1, 1, H, W] tensor with values in [0, 1].
TensorF read_pgm(const std::filesystem::path& path);

/// Rank-1 or rank-2 tensor as comma-separated rows.
void write_csv(const std::filesystem::path& path, const TensorF& matrix);

}  // namespace rotequiv

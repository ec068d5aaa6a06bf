// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "rotequiv/layers.hpp"
#include "rotequiv/tensor.hpp"

namespace rotequiv::nn {

/// Flat container of named values.
///
/// File layout (little-endian): the 8-byte magic "REQCKPT1", a u32 format
/// version, a u64 entry count, then per entry: u32 name length, name bytes,
/// u8 dtype tag (0 f32, 1 f64, 2 i64, 3 utf8), u32 rank, u64 extents, and the
/// raw element data. utf8 entries have rank 1 and their byte length as extent.
class Checkpoint {
 public:
  using Value = std::variant<TensorF, TensorD, std::vector<std::int64_t>, std::string>;

  static constexpr char kMagic[9] = "REQCKPT1";
  static constexpr std::uint32_t kVersion = 1;

  void put(const std::string& name, Value value) { entries_[name] = std::move(value); }
  bool contains(const std::string& name) const { return entries_.count(name) != 0; }

  const TensorF& tensor_f32(const std::string& name) const;
  const std::vector<std::int64_t>& ints(const std::string& name) const;
  const std::string& text(const std::string& name) const;
  const std::map<std::string, Value>& entries() const { return entries_; }

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);

 private:
  const Value& at(const std::string& name) const;
  std::map<std::string, Value> entries_;
};

/// Stores parameters under "param/<name>" and buffers under "buffer/<name>".
void store_registry(Checkpoint& ckpt, const Registry<float>& reg);

/// Copies stored values into the registry's tensors; shapes must match and
/// every parameter and buffer must be present.
void restore_registry(const Checkpoint& ckpt, Registry<float>& reg);

}  // namespace rotequiv::nn

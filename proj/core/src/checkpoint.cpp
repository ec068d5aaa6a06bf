// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#include "rotequiv/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace rotequiv::nn {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

enum Tag : std::uint8_t { kF32 = 0, kF64 = 1, kI64 = 2, kUtf8 = 3 };

template <typename U>
void put_raw(std::ostream& os, const U& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(U));
}

template <typename U>
U get_raw(std::istream& is, const std::string& where) {
  U v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(U))) throw std::runtime_error(where + ": truncated checkpoint");
  return v;
}

void put_dims(std::ostream& os, const Shape& shape) {
  put_raw(os, static_cast<std::uint32_t>(shape.size()));
  for (auto d : shape) put_raw(os, static_cast<std::uint64_t>(d));
}

}  // namespace

const Checkpoint::Value& Checkpoint::at(const std::string& name) const {
  const auto it = entries_.find(name);
  if (it == entries_.end()) throw std::out_of_range("checkpoint has no entry '" + name + "'");
  return it->second;
}

const TensorF& Checkpoint::tensor_f32(const std::string& name) const {
  const auto* t = std::get_if<TensorF>(&at(name));
  if (!t) throw std::runtime_error("checkpoint entry '" + name + "' is not f32");
  return *t;
}

const std::vector<std::int64_t>& Checkpoint::ints(const std::string& name) const {
  const auto* t = std::get_if<std::vector<std::int64_t>>(&at(name));
  if (!t) throw std::runtime_error("checkpoint entry '" + name + "' is not i64");
  return *t;
}

const std::string& Checkpoint::text(const std::string& name) const {
  const auto* t = std::get_if<std::string>(&at(name));
  if (!t) throw std::runtime_error("checkpoint entry '" + name + "' is not utf8");
  return *t;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + tmp);
    os.write(kMagic, 8);
    put_raw(os, kVersion);
    put_raw(os, static_cast<std::uint64_t>(entries_.size()));
    for (const auto& [name, value] : entries_) {
      put_raw(os, static_cast<std::uint32_t>(name.size()));
      os.write(name.data(), static_cast<std::streamsize>(name.size()));
      std::visit(
          [&](const auto& v) {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, TensorF> || std::is_same_v<V, TensorD>) {
              put_raw(os, std::is_same_v<V, TensorF> ? kF32 : kF64);
              put_dims(os, v.shape());
              os.write(reinterpret_cast<const char*>(v.ptr()),
                       static_cast<std::streamsize>(v.numel() * sizeof(typename V::value_type)));
            } else if constexpr (std::is_same_v<V, std::vector<std::int64_t>>) {
              put_raw(os, kI64);
              put_dims(os, Shape{v.size()});
              os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * 8));
            } else {
              put_raw(os, kUtf8);
              put_dims(os, Shape{v.size()});
              os.write(v.data(), static_cast<std::streamsize>(v.size()));
            }
          },
          value);
    }
    if (!os) throw std::runtime_error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  const std::string where = path.string();
  if (!is) throw std::runtime_error("cannot read checkpoint " + where);
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw std::runtime_error(where + ": bad magic");
  const auto version = get_raw<std::uint32_t>(is, where);
  if (version != kVersion) throw std::runtime_error(where + ": unsupported version " + std::to_string(version));
  const auto count = get_raw<std::uint64_t>(is, where);
  Checkpoint ck;
  for (std::uint64_t e = 0; e < count; ++e) {
    const auto len = get_raw<std::uint32_t>(is, where);
    std::string name(len, '\0');
    if (!is.read(name.data(), len)) throw std::runtime_error(where + ": truncated name");
    const auto tag = get_raw<std::uint8_t>(is, where);
    const auto rank = get_raw<std::uint32_t>(is, where);
    Shape shape;
    for (std::uint32_t d = 0; d < rank; ++d) shape.push_back(static_cast<std::size_t>(get_raw<std::uint64_t>(is, where)));
    const std::size_t n = shape_numel(shape);
    auto read_into = [&](char* dst, std::size_t bytes) {
      if (!is.read(dst, static_cast<std::streamsize>(bytes))) throw std::runtime_error(where + ": truncated data for " + name);
    };
    switch (tag) {
      case kF32: {
        TensorF t(shape);
        read_into(reinterpret_cast<char*>(t.ptr()), n * 4);
        ck.put(name, std::move(t));
        break;
      }
      case kF64: {
        TensorD t(shape);
        read_into(reinterpret_cast<char*>(t.ptr()), n * 8);
        ck.put(name, std::move(t));
        break;
      }
      case kI64: {
        std::vector<std::int64_t> v(n);
        read_into(reinterpret_cast<char*>(v.data()), n * 8);
        ck.put(name, std::move(v));
        break;
      }
      case kUtf8: {
        std::string s(n, '\0');
        read_into(s.data(), n);
        ck.put(name, std::move(s));
        break;
      }
      default:
        throw std::runtime_error(where + ": unknown dtype tag for " + name);
    }
  }
  return ck;
}

void store_registry(Checkpoint& ckpt, const Registry<float>& reg) {
  for (const auto& p : reg.params) ckpt.put("param/" + p.name, p.var.value());
  for (const auto& b : reg.buffers) ckpt.put("buffer/" + b.name, *b.tensor);
}

void restore_registry(const Checkpoint& ckpt, Registry<float>& reg) {
  auto copy = [&](const std::string& key, TensorF& dst) {
    const TensorF& src = ckpt.tensor_f32(key);
    if (src.shape() != dst.shape()) {
      throw std::runtime_error("checkpoint entry '" + key + "' has shape " + shape_str(src.shape()) + ", model expects " +
                               shape_str(dst.shape()));
    }
    dst = src;
  };
  for (auto& p : reg.params) copy("param/" + p.name, p.var.mutable_value());
  for (auto& b : reg.buffers) copy("buffer/" + b.name, *b.tensor);
}

}  // namespace rotequiv::nn

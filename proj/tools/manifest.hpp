// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace rotequiv::cli {

/// Run record written as manifest.json next to a command's outputs.
class Manifest {
 public:
  Manifest(std::string subcommand, std::vector<std::string> argv, std::uint64_t seed);

  void set_config(const std::string& config_text);
  void set(const std::string& key, nlohmann::json value) { extra_[key] = std::move(value); }
  void add_artifact(const std::string& file, const std::string& kind);

  /// Writes <dir>/manifest.json.
  void write(const std::filesystem::path& dir) const;

 private:
  nlohmann::json doc_;
  nlohmann::json extra_ = nlohmann::json::object();
};

}  // namespace rotequiv::cli

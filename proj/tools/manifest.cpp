// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#include "manifest.hpp"

#include "rotequiv/checkpoint.hpp"
#include "rotequiv/harness/report.hpp"

namespace rotequiv::cli {

Manifest::Manifest(std::string subcommand, std::vector<std::string> argv, std::uint64_t seed) {
  doc_["tool"] = "rotequiv";
  doc_["version"] = ROTEQUIV_VERSION;
  doc_["subcommand"] = std::move(subcommand);
  doc_["argv"] = std::move(argv);
  doc_["seed"] = seed;
  doc_["formats"] = {{"checkpoint", std::string(nn::Checkpoint::kMagic) + " v" + std::to_string(nn::Checkpoint::kVersion)},
                     {"csv", 1},
                     {"config", 1}};
  doc_["artifacts"] = nlohmann::json::array();
}

void Manifest::set_config(const std::string& config_text) { doc_["config"] = config_text; }

void Manifest::add_artifact(const std::string& file, const std::string& kind) {
  doc_["artifacts"].push_back({{"file", file}, {"kind", kind}});
}

void Manifest::write(const std::filesystem::path& dir) const {
  nlohmann::json out = doc_;
  for (const auto& [k, v] : extra_.items()) out[k] = v;
  harness::write_text(dir / "manifest.json", out.dump(2) + "\n");
}

}  // namespace rotequiv::cli

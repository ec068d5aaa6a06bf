// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#include "rotequiv/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace rotequiv::nn {

ConfigError::ConfigError(const std::string& message, int line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line), message_(message) {}

ConfigError::ConfigError(const std::string& file, const std::string& message, int line)
    : std::runtime_error(file + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + message),
      line_(line),
      message_(message) {}

NetworkConfig NetworkConfig::defaults() {
  NetworkConfig c;
  for (int ch : {32, 64, 96, 128}) c.stages.push_back(StageConfig{ch, 1, DownsampleMode::strict, true});
  return c;
}

namespace {

constexpr int kBranchChoices[] = {2, 3, 5, 7, 9};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

int parse_int(std::string_view v, const std::string& what, int line) {
  int out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError(what + ": expected an integer, got '" + std::string(v) + "'", line);
  return out;
}

bool parse_bool(std::string_view v, const std::string& what, int line) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError(what + ": expected true or false, got '" + std::string(v) + "'", line);
}

DownsampleMode parse_mode(std::string_view v, const std::string& what, int line) {
  if (v == "strict") return DownsampleMode::strict;
  if (v == "approx") return DownsampleMode::approx;
  throw ConfigError(what + ": expected strict or approx, got '" + std::string(v) + "'", line);
}

// Index of a "stage.K" section (K >= 1), or -1 for other names.
int stage_index(std::string_view section) {
  if (section.substr(0, 6) != "stage.") return -1;
  const auto rest = section.substr(6);
  int k = 0;
  const auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), k);
  if (ec != std::errc() || ptr != rest.data() + rest.size() || k < 1) return -1;
  return k;
}

void assign(NetworkConfig& c, std::map<int, StageConfig>* pending_stages, std::string_view section,
            std::string_view key, std::string_view value, int line) {
  const std::string what = std::string(section) + "." + std::string(key);
  if (section == "network") {
    if (key == "orientations") return void(c.orientations = parse_int(value, what, line));
    if (key == "input_size") return void(c.input_size = parse_int(value, what, line));
    if (key == "input_channels") return void(c.input_channels = parse_int(value, what, line));
  } else if (section == "stem") {
    if (key == "channels") return void(c.stem.channels = parse_int(value, what, line));
    if (key == "downsample_mode") return void(c.stem.downsample_mode = parse_mode(value, what, line));
  } else if (section == "head") {
    if (key == "branch_modules") return void(c.head.branch_modules = parse_int(value, what, line));
    if (key == "hidden_channels") return void(c.head.hidden_channels = parse_int(value, what, line));
  } else if (section == "task") {
    if (key == "num_classes") return void(c.task.num_classes = parse_int(value, what, line));
  } else if (const int k = stage_index(section); k > 0) {
    StageConfig* st = nullptr;
    if (pending_stages) {
      st = &(*pending_stages)[k];
    } else {
      if (static_cast<std::size_t>(k) > c.stages.size()) {
        throw ConfigError("no stage " + std::to_string(k) + " (config has " + std::to_string(c.stages.size()) + ")",
                          line);
      }
      st = &c.stages[static_cast<std::size_t>(k - 1)];
    }
    if (key == "channels") return void(st->channels = parse_int(value, what, line));
    if (key == "num_blocks") return void(st->num_blocks = parse_int(value, what, line));
    if (key == "downsample_mode") return void(st->downsample_mode = parse_mode(value, what, line));
    if (key == "attention") return void(st->attention = parse_bool(value, what, line));
  } else {
    throw ConfigError("unknown section [" + std::string(section) + "]", line);
  }
  throw ConfigError("unknown key '" + std::string(key) + "' in [" + std::string(section) + "]", line);
}

}  // namespace

void NetworkConfig::validate() const {
  if (orientations < 1) throw ConfigError("network.orientations must be >= 1");
  if (input_size < 2) throw ConfigError("network.input_size must be >= 2");
  if (input_channels < 1) throw ConfigError("network.input_channels must be >= 1");
  auto check_channels = [&](int ch, const std::string& what) {
    if (ch < 1 || ch % orientations != 0) {
      throw ConfigError(what + " = " + std::to_string(ch) + " must be a positive multiple of orientations (" +
                        std::to_string(orientations) + ")");
    }
  };
  check_channels(stem.channels, "stem.channels");
  if (stages.empty()) throw ConfigError("at least one [stage.K] section is required");
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const std::string p = "stage." + std::to_string(i + 1);
    check_channels(stages[i].channels, p + ".channels");
    if (stages[i].num_blocks < 0) throw ConfigError(p + ".num_blocks must be >= 0");
  }
  if (std::find(std::begin(kBranchChoices), std::end(kBranchChoices), head.branch_modules) == std::end(kBranchChoices)) {
    throw ConfigError("head.branch_modules must be one of 2, 3, 5, 7, 9; got " + std::to_string(head.branch_modules));
  }
  if (head.hidden_channels < 1) throw ConfigError("head.hidden_channels must be >= 1");
  if (task.num_classes < 2) throw ConfigError("task.num_classes must be >= 2");
  (void)plan_convs(*this);
}

NetworkConfig parse_config(std::string_view text) {
  NetworkConfig c;
  std::map<int, StageConfig> stages;
  std::set<std::string> seen_sections, seen_keys;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find_first_of("#;"); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
      section = std::string(trim(line.substr(1, line.size() - 2)));
      const bool known = section == "network" || section == "stem" || section == "head" || section == "task" ||
                         stage_index(section) > 0;
      if (!known) throw ConfigError("unknown section [" + section + "]", line_no);
      if (!seen_sections.insert(section).second) throw ConfigError("duplicate section [" + section + "]", line_no);
      if (const int k = stage_index(section); k > 0) stages[k];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", line_no);
    if (section.empty()) throw ConfigError("key outside of any section", line_no);
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw ConfigError("empty key or value", line_no);
    if (!seen_keys.insert(section + "." + std::string(key)).second) {
      throw ConfigError("duplicate key '" + std::string(key) + "' in [" + section + "]", line_no);
    }
    assign(c, &stages, section, key, value, line_no);
  }
  int expect = 1;
  for (const auto& [k, st] : stages) {
    if (k != expect) throw ConfigError("stage sections must be numbered 1.." + std::to_string(stages.size()));
    c.stages.push_back(st);
    ++expect;
  }
  c.validate();
  return c;
}

NetworkConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string(), e.message(), e.line());
  }
}

std::string serialize(const NetworkConfig& c) {
  std::ostringstream os;
  os << "[network]\n"
     << "orientations = " << c.orientations << "\n"
     << "input_size = " << c.input_size << "\n"
     << "input_channels = " << c.input_channels << "\n\n"
     << "[stem]\n"
     << "channels = " << c.stem.channels << "\n"
     << "downsample_mode = " << to_string(c.stem.downsample_mode) << "\n";
  for (std::size_t i = 0; i < c.stages.size(); ++i) {
    const auto& s = c.stages[i];
    os << "\n[stage." << i + 1 << "]\n"
       << "channels = " << s.channels << "\n"
       << "num_blocks = " << s.num_blocks << "\n"
       << "downsample_mode = " << to_string(s.downsample_mode) << "\n"
       << "attention = " << (s.attention ? "true" : "false") << "\n";
  }
  os << "\n[head]\n"
     << "branch_modules = " << c.head.branch_modules << "\n"
     << "hidden_channels = " << c.head.hidden_channels << "\n\n"
     << "[task]\n"
     << "num_classes = " << c.task.num_classes << "\n";
  return os.str();
}

void apply_override(NetworkConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
  const auto path = trim(assignment.substr(0, eq));
  const auto value = trim(assignment.substr(eq + 1));
  const auto dot = path.rfind('.');
  if (dot == std::string_view::npos || value.empty()) {
    throw ConfigError("override '" + std::string(assignment) + "' must look like section.key=value");
  }
  NetworkConfig next = config;
  assign(next, nullptr, path.substr(0, dot), path.substr(dot + 1), value, 0);
  next.validate();
  config = std::move(next);
}

void set_downsample_mode(NetworkConfig& config, DownsampleMode mode) {
  config.stem.downsample_mode = mode;
  for (auto& s : config.stages) s.downsample_mode = mode;
}

std::vector<PlannedConv> plan_convs(const NetworkConfig& c) {
  std::vector<PlannedConv> plan;
  int extent = c.input_size;
  auto push = [&](std::string name, std::string stage, LayerRole role, ConvSpec spec) {
    int out = 0;
    try {
      out = out_size(spec, extent);
    } catch (const std::exception&) {
      throw ConfigError(name + ": spatial extent " + std::to_string(extent) + " collapses under " + to_string(spec));
    }
    plan.push_back({std::move(name), std::move(stage), role, spec, extent, out});
    extent = out;
  };
  auto push_down = [&](const std::string& prefix, const std::string& stage, DownsampleMode mode) {
    if (extent < 2) throw ConfigError(prefix + ": extent " + std::to_string(extent) + " is too small to downsample");
    if (mode == DownsampleMode::strict && extent % 2 == 0) push(prefix + ".tuning", stage, LayerRole::tuning, kTuningSpec);
    push(prefix + ".down", stage, LayerRole::down, kDownSpec);
  };
  const ConvSpec same{3, 1, 1, 1};
  push("stem.conv", "S0", LayerRole::lift, same);
  push_down("stem.downsample", "S0", c.stem.downsample_mode);
  for (std::size_t i = 0; i < c.stages.size(); ++i) {
    const std::string p = "stage" + std::to_string(i + 1);
    const std::string tag = "S" + std::to_string(i + 1);
    push_down(p + ".downsample", tag, c.stages[i].downsample_mode);
    for (int b = 0; b < c.stages[i].num_blocks; ++b) push(p + ".block" + std::to_string(b), tag, LayerRole::block, same);
  }
  for (int m = 0; m + 1 < c.head.branch_modules; ++m) {
    push("head.branch" + std::to_string(m), "head", LayerRole::branch, same);
  }
  push("head.aggregate", "head", LayerRole::aggregate, ConvSpec{1, 0, 1, 1});
  return plan;
}

}  // namespace rotequiv::nn

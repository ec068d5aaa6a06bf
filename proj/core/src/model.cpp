// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#include "rotequiv/model.hpp"

namespace rotequiv::nn {

template <typename T>
Model<T>::Model(const NetworkConfig& config, Rng& rng) : config_(config), group_(config.orientations) {
  config_.validate();
  const auto n = static_cast<std::size_t>(config_.orientations);
  const ConvSpec same{3, 1, 1, 1};

  std::size_t fields = static_cast<std::size_t>(config_.stem.channels) / n;
  stem_conv_.emplace(ConvKind::lift, static_cast<std::size_t>(config_.input_channels), fields, same, group_, rng);
  stem_down_.emplace(config_.stem.downsample_mode, fields, fields, config_.input_size, group_, rng);
  int extent = stem_down_->out_extent();

  stages_.reserve(config_.stages.size());
  for (const auto& sc : config_.stages) {
    const std::size_t out_fields = static_cast<std::size_t>(sc.channels) / n;
    Stage st{DownsampleBlock<T>(sc.downsample_mode, fields, out_fields, extent, group_, rng), {}, std::nullopt};
    extent = st.down.out_extent();
    for (int b = 0; b < sc.num_blocks; ++b) {
      st.blocks.emplace_back(ConvKind::group, out_fields, out_fields, same, group_, rng);
    }
    if (sc.attention) st.attention.emplace(static_cast<std::size_t>(sc.channels), group_, rng);
    stages_.push_back(std::move(st));
    fields = out_fields;
  }

  const auto hidden = static_cast<std::size_t>(config_.head.hidden_channels);
  for (int m = 0; m + 1 < config_.head.branch_modules; ++m) {
    branches_.emplace_back(m == 0 ? fields : hidden, hidden, group_, rng);
  }
  aggregate_.emplace(ConvKind::group, hidden, static_cast<std::size_t>(config_.task.num_classes) + 1,
                     ConvSpec{1, 0, 1, 1}, group_, rng);
}

template <typename T>
ModelOutput<T> Model<T>::forward(const Var<T>& images, bool training) {
  const auto& s = images.shape();
  const auto size = static_cast<std::size_t>(config_.input_size);
  if (s.size() != 4 || s[1] != static_cast<std::size_t>(config_.input_channels) || s[2] != size || s[3] != size) {
    throw ShapeError("Model: expected [B, " + std::to_string(config_.input_channels) + ", " +
                     std::to_string(size) + ", " + std::to_string(size) + "], got " + shape_str(s));
  }
  ModelOutput<T> out;
  Var<T> h = stem_down_->forward(stem_conv_->forward(images, training), training);
  out.taps.emplace_back("S0", h);
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    auto& st = stages_[i];
    h = st.down.forward(h, training);
    for (auto& b : st.blocks) h = b.forward(h, training);
    if (st.attention) h = st.attention->forward(h);
    out.taps.emplace_back("S" + std::to_string(i + 1), h);
  }
  for (auto& br : branches_) h = br.forward(h, training);
  const Var<T> agg = aggregate_->forward(h);
  out.taps.emplace_back("head", agg);

  const auto n = static_cast<std::size_t>(group_.order());
  const auto k = static_cast<std::size_t>(config_.task.num_classes);
  const Var<T> cls = orientation_pool(ad::channel_slice(agg, 0, k * n), group_, PoolKind::mean);
  out.class_logits = ad::global_avg_pool(cls);
  out.orientation_scores = ad::global_avg_pool(ad::channel_slice(agg, k * n, n));
  out.angle = orientation_angle(out.orientation_scores, group_);
  return out;
}

template <typename T>
Registry<T> Model<T>::registry() {
  Registry<T> reg;
  stem_conv_->collect("stem.conv.", reg);
  stem_down_->collect("stem.downsample.", reg);
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    const std::string p = "stage" + std::to_string(i + 1) + ".";
    stages_[i].down.collect(p + "downsample.", reg);
    for (std::size_t b = 0; b < stages_[i].blocks.size(); ++b) {
      stages_[i].blocks[b].collect(p + "block" + std::to_string(b) + ".", reg);
    }
    if (stages_[i].attention) stages_[i].attention->collect(p + "attention.", reg);
  }
  for (std::size_t m = 0; m < branches_.size(); ++m) branches_[m].collect("head.branch" + std::to_string(m) + ".", reg);
  aggregate_->collect("head.aggregate.", reg);
  return reg;
}

template <typename T>
ParamCounts Model<T>::param_counts() const {
  ParamCounts pc;
  pc.per_module["stem"] = stem_conv_->param_count() + stem_down_->param_count();
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    std::size_t c = stages_[i].down.param_count();
    for (const auto& b : stages_[i].blocks) c += b.param_count();
    if (stages_[i].attention) c += stages_[i].attention->param_count();
    pc.per_module["stage" + std::to_string(i + 1)] = c;
  }
  std::size_t head = aggregate_->param_count();
  for (const auto& b : branches_) head += b.param_count();
  pc.per_module["head"] = head;
  for (const auto& [name, c] : pc.per_module) pc.total += c;
  return pc;
}

template <typename T>
std::vector<std::string> Model<T>::tap_names() const {
  std::vector<std::string> names{"S0"};
  for (std::size_t i = 0; i < stages_.size(); ++i) names.push_back("S" + std::to_string(i + 1));
  names.push_back("head");
  return names;
}

std::size_t head_param_count(std::size_t in_channels, int orientations, int branch_modules, int hidden,
                             int num_classes) {
  const std::size_t n = static_cast<std::size_t>(orientations), h = static_cast<std::size_t>(hidden);
  const std::size_t fin = in_channels / n;
  std::size_t total = 0;
  for (int m = 0; m + 1 < branch_modules; ++m) {
    const std::size_t in = m == 0 ? fin : h;
    total += h * in * 9 + h + 2 * h;  // shared kernel, bias, norm affine
  }
  const std::size_t k1 = static_cast<std::size_t>(num_classes) + 1;
  return total + k1 * h * n + k1;
}

std::size_t single_branch_head_param_count(std::size_t in_channels, int orientations, int branch_modules, int hidden,
                                           int num_classes) {
  const std::size_t n = static_cast<std::size_t>(orientations);
  const std::size_t w = static_cast<std::size_t>(hidden) * n;
  std::size_t total = 0;
  for (int m = 0; m + 1 < branch_modules; ++m) {
    const std::size_t in = m == 0 ? in_channels : w;
    total += w * in * 9 + w + 2 * w;
  }
  const std::size_t k1 = static_cast<std::size_t>(num_classes) + 1;
  return total + k1 * w + k1;
}

std::size_t attention_param_count(std::size_t channels, int orientations, bool naive) {
  const std::size_t outs = naive ? channels : channels / static_cast<std::size_t>(orientations);
  return outs * channels + outs;
}

template class Model<float>;
template class Model<double>;

}  // namespace rotequiv::nn

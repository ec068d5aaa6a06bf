// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#include "rotequiv/harness/train.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>

#include "rotequiv/checkpoint.hpp"
#include "rotequiv/harness/equiv_error.hpp"

namespace rotequiv::harness {

namespace {

constexpr std::uint64_t kShuffleStream = 0x5348554646ULL;
constexpr int kEpsAngles[] = {90, 180, 270};

double to_degrees_wrapped(double rad) {
  double d = std::fmod(rad * 180.0 / std::numbers::pi, 360.0);
  if (d < 0) d += 360.0;
  return d;
}

std::vector<float> radians(std::span<const float> deg) {
  std::vector<float> out;
  out.reserve(deg.size());
  for (float d : deg) out.push_back(static_cast<float>(d * std::numbers::pi / 180.0));
  return out;
}

}  // namespace

std::vector<std::string> logged_stages(const nn::Model<float>& model) {
  std::vector<std::string> out;
  for (const auto& n : model.tap_names()) {
    if (!n.empty() && n[0] == 'S') out.push_back(n);
  }
  return out;
}

Predictions predict(nn::Model<float>& model, const TensorF& images, int batch) {
  ad::NoGradGuard no_grad;
  Predictions out;
  const std::size_t n = images.dim(0);
  const std::size_t per = n ? images.numel() / n : 0;
  for (std::size_t lo = 0; lo < n; lo += static_cast<std::size_t>(batch)) {
    const std::size_t hi = std::min(n, lo + static_cast<std::size_t>(batch));
    Shape shape = images.shape();
    shape[0] = hi - lo;
    TensorF chunk(shape);
    std::copy(images.ptr() + lo * per, images.ptr() + hi * per, chunk.ptr());
    const auto res = model.forward(ad::Var<float>(chunk), false);
    const TensorF& logits = res.class_logits.value();
    const std::size_t k = logits.dim(1);
    for (std::size_t i = 0; i < hi - lo; ++i) {
      const float* row = logits.ptr() + i * k;
      out.classes.push_back(static_cast<int>(std::max_element(row, row + k) - row));
      out.angle_deg.push_back(to_degrees_wrapped(res.angle.value()[i]));
    }
  }
  return out;
}

EvalResult evaluate(nn::Model<float>& model, const Split& split, double angle_weight, int batch) {
  ad::NoGradGuard no_grad;
  EvalResult r;
  const std::size_t n = split.size();
  if (n == 0) return r;
  double loss_sum = 0.0;
  std::size_t correct = 0;
  double ang_sum = 0.0;
  std::vector<std::size_t> idx;
  for (std::size_t lo = 0; lo < n; lo += static_cast<std::size_t>(batch)) {
    const std::size_t hi = std::min(n, lo + static_cast<std::size_t>(batch));
    idx.resize(hi - lo);
    std::iota(idx.begin(), idx.end(), lo);
    const Split b = split.gather(idx);
    const auto res = model.forward(ad::Var<float>(b.images), false);
    const auto sym = symmetry_orders(b.labels);
    const auto target = radians(b.theta_deg);
    const auto ce = ad::cross_entropy(res.class_logits, b.labels);
    const auto al = nn::angular_loss(res.angle, std::span<const float>(target), std::span<const int>(sym));
    loss_sum += (ce.value()[0] + angle_weight * al.value()[0]) * static_cast<double>(hi - lo);
    const TensorF& logits = res.class_logits.value();
    const std::size_t k = logits.dim(1);
    for (std::size_t i = 0; i < hi - lo; ++i) {
      const float* row = logits.ptr() + i * k;
      if (std::max_element(row, row + k) - row == b.labels[i]) ++correct;
      ang_sum += angular_difference_deg(to_degrees_wrapped(res.angle.value()[i]), b.theta_deg[i], sym[i]);
    }
  }
  r.loss = loss_sum / static_cast<double>(n);
  r.accuracy = static_cast<double>(correct) / static_cast<double>(n);
  r.angular_error_deg = ang_sum / static_cast<double>(n);
  return r;
}

Trainer::Trainer(nn::Model<float>& model, const Dataset& data, TrainHyper hyper)
    : model_(model), data_(data), hyper_(hyper), optim_(model.registry().params, hyper.optim) {
  if (hyper_.epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (hyper_.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (data_.train.size() == 0 && hyper_.epochs > 0) throw std::invalid_argument("training split is empty");
  history_.stages = logged_stages(model_);
  const std::size_t m = std::min<std::size_t>(static_cast<std::size_t>(std::max(hyper_.eps_samples, 0)),
                                              data_.test.size());
  std::vector<std::size_t> idx(m);
  std::iota(idx.begin(), idx.end(), 0);
  if (m > 0) eps_inputs_ = data_.test.gather(idx).images;
}

std::int64_t Trainer::steps_per_epoch() const {
  const auto n = static_cast<std::int64_t>(data_.train.size());
  return (n + hyper_.batch_size - 1) / hyper_.batch_size;
}

EpochRecord Trainer::measure(int epoch) {
  EpochRecord rec;
  rec.epoch = epoch;
  const auto ev = evaluate(model_, data_.test, hyper_.angle_weight, hyper_.eval_batch);
  rec.loss = ev.loss;
  rec.accuracy = ev.accuracy;
  rec.angular_error_deg = ev.angular_error_deg;
  if (eps_inputs_.numel() > 0) {
    const auto report = stagewise_error(model_, eps_inputs_, kEpsAngles);
    for (const auto& stage : history_.stages) {
      double sum = 0.0;
      int count = 0;
      for (const auto& row : report.rows) {
        if (row.stage == stage) {
          sum += row.normalized;
          ++count;
        }
      }
      rec.eps.push_back(count ? sum / count : 0.0);
    }
  }
  return rec;
}

const EpochRecord& Trainer::run_epoch() {
  if (history_.epochs.empty()) history_.epochs.push_back(measure(0));
  const int epoch = epochs_done_ + 1;
  std::vector<std::size_t> order(data_.train.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng = Rng(hyper_.seed).split(kShuffleStream + static_cast<std::uint64_t>(epoch));
  rng.shuffle(order.begin(), order.end());
  const std::int64_t total = steps_per_epoch() * hyper_.epochs;
  for (std::size_t lo = 0; lo < order.size(); lo += static_cast<std::size_t>(hyper_.batch_size)) {
    const std::size_t hi = std::min(order.size(), lo + static_cast<std::size_t>(hyper_.batch_size));
    const Split b = data_.train.gather(std::span<const std::size_t>(order.data() + lo, hi - lo));
    const auto sym = symmetry_orders(b.labels);
    const auto target = radians(b.theta_deg);
    optim_.zero_grad();
    const auto res = model_.forward(ad::Var<float>(b.images), true);
    const auto ce = ad::cross_entropy(res.class_logits, b.labels);
    const auto al = nn::angular_loss(res.angle, std::span<const float>(target), std::span<const int>(sym));
    const auto loss = ad::add(ce, ad::scale(al, static_cast<float>(hyper_.angle_weight)));
    const double value = loss.value()[0];
    if (!std::isfinite(value)) {
      throw DivergenceError("training diverged: non-finite loss at epoch " + std::to_string(epoch) + ", step " +
                            std::to_string(optim_.step_count() + 1) + " (cross-entropy " +
                            std::to_string(ce.value()[0]) + ", angular " + std::to_string(al.value()[0]) + ")");
    }
    ad::backward(loss);
    optim_.step(ad::cosine_half_lr(hyper_.optim.lr, optim_.step_count(), total));
  }
  epochs_done_ = epoch;
  history_.epochs.push_back(measure(epoch));
  return history_.epochs.back();
}

const TrainingHistory& Trainer::run(const std::function<void(const EpochRecord&)>& on_epoch) {
  if (history_.epochs.empty()) {
    history_.epochs.push_back(measure(0));
    if (on_epoch) on_epoch(history_.epochs.back());
  }
  while (epochs_done_ < hyper_.epochs) {
    const auto& rec = run_epoch();
    if (on_epoch) on_epoch(rec);
  }
  return history_;
}

void Trainer::save(const std::filesystem::path& path) const {
  nn::Checkpoint ck;
  auto reg = model_.registry();
  nn::store_registry(ck, reg);
  ck.put("config", nn::serialize(model_.config()));
  ck.put("trainer/epochs_done", std::vector<std::int64_t>{epochs_done_});
  ck.put("trainer/steps", std::vector<std::int64_t>{optim_.step_count()});
  ck.put("trainer/hyper", std::vector<std::int64_t>{hyper_.epochs, hyper_.batch_size,
                                                     static_cast<std::int64_t>(hyper_.seed), hyper_.eps_samples});
  const auto& params = optim_.params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    ck.put("optim/m/" + params[i].name, optim_.first_moments()[i]);
    ck.put("optim/v/" + params[i].name, optim_.second_moments()[i]);
  }
  const std::size_t cols = 4 + history_.stages.size();
  TensorD log({history_.epochs.size(), cols});
  for (std::size_t r = 0; r < history_.epochs.size(); ++r) {
    const auto& e = history_.epochs[r];
    log[r * cols + 0] = e.epoch;
    log[r * cols + 1] = e.loss;
    log[r * cols + 2] = e.accuracy;
    log[r * cols + 3] = e.angular_error_deg;
    for (std::size_t s = 0; s < history_.stages.size(); ++s) log[r * cols + 4 + s] = s < e.eps.size() ? e.eps[s] : 0.0;
  }
  ck.put("trainer/log", log);
  ck.save(path);
}

void Trainer::load(const std::filesystem::path& path) {
  const auto ck = nn::Checkpoint::load(path);
  if (ck.contains("config") && nn::parse_config(ck.text("config")) != model_.config()) {
    throw std::runtime_error("checkpoint " + path.string() + " was written for a different network config");
  }
  auto reg = model_.registry();
  nn::restore_registry(ck, reg);
  epochs_done_ = static_cast<int>(ck.ints("trainer/epochs_done").at(0));
  optim_.set_step_count(ck.ints("trainer/steps").at(0));
  const auto& params = optim_.params();
  auto& m = optim_.first_moments();
  auto& v = optim_.second_moments();
  for (std::size_t i = 0; i < params.size(); ++i) {
    m[i] = ck.tensor_f32("optim/m/" + params[i].name);
    v[i] = ck.tensor_f32("optim/v/" + params[i].name);
  }
  history_.epochs.clear();
  const auto& entry = std::get<TensorD>(ck.entries().at("trainer/log"));
  const std::size_t cols = 4 + history_.stages.size();
  if (entry.rank() != 2 || entry.dim(1) != cols) throw std::runtime_error("checkpoint training log has wrong layout");
  for (std::size_t r = 0; r < entry.dim(0); ++r) {
    EpochRecord e;
    e.epoch = static_cast<int>(entry[r * cols]);
    e.loss = entry[r * cols + 1];
    e.accuracy = entry[r * cols + 2];
    e.angular_error_deg = entry[r * cols + 3];
    for (std::size_t s = 0; s < history_.stages.size(); ++s) e.eps.push_back(entry[r * cols + 4 + s]);
    history_.epochs.push_back(std::move(e));
  }
}

}  // namespace rotequiv::harness

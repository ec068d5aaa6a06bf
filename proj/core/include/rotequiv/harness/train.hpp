// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rotequiv/harness/dataset.hpp"
#include "rotequiv/model.hpp"
#include "rotequiv/optim.hpp"

namespace rotequiv::harness {

struct TrainHyper {
  int epochs = 20;
  int batch_size = 16;
  ad::AdamWConfig optim;
  double angle_weight = 1.0;
  std::uint64_t seed = 0;
  int eps_samples = 8;  // test images used for the per-epoch equivariance error
  int eval_batch = 50;
};

/// Row of the training log. Epoch 0 is measured before the first update.
struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;  // held-out split, evaluation mode
  double accuracy = 0.0;
  double angular_error_deg = 0.0;
  std::vector<double> eps;  // normalized error per stage tap, mean over 90/180/270
  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainingHistory {
  std::vector<std::string> stages;
  std::vector<EpochRecord> epochs;
};

/// Thrown when a training loss is NaN or infinite.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Predictions {
  std::vector<int> classes;
  std::vector<double> angle_deg;  // [0, 360)
};

/// Evaluation-mode predictions for a batch of images.
Predictions predict(nn::Model<float>& model, const TensorF& images, int batch = 50);

struct EvalResult {
  double loss = 0.0;
  double accuracy = 0.0;
  double angular_error_deg = 0.0;
};

EvalResult evaluate(nn::Model<float>& model, const Split& split, double angle_weight = 1.0, int batch = 50);

/// Mini-batch AdamW training with a per-epoch log. The batch order of epoch e
/// depends only on (seed, e), so a trainer restored from a checkpoint
/// continues the exact trajectory of an uninterrupted run.
class Trainer {
 public:
  Trainer(nn::Model<float>& model, const Dataset& data, TrainHyper hyper);

  /// Trains until hyper.epochs, recording epoch 0 first if needed.
  const TrainingHistory& run(const std::function<void(const EpochRecord&)>& on_epoch = {});
  /// Records epoch 0 (if not yet done) and trains one more epoch.
  const EpochRecord& run_epoch();

  int epochs_done() const { return epochs_done_; }
  const TrainingHistory& history() const { return history_; }
  const TrainHyper& hyper() const { return hyper_; }

  /// Model, optimizer state, log and hyperparameters.
  void save(const std::filesystem::path& path) const;
  /// Restores state written by save() for the same model configuration.
  void load(const std::filesystem::path& path);

 private:
  EpochRecord measure(int epoch);
  std::int64_t steps_per_epoch() const;

  nn::Model<float>& model_;
  const Dataset& data_;
  TrainHyper hyper_;
  ad::AdamW<float> optim_;
  TrainingHistory history_;
  int epochs_done_ = 0;
  TensorF eps_inputs_;
};

/// Stages whose error is logged: the model taps named S<k>.
std::vector<std::string> logged_stages(const nn::Model<float>& model);

}  // namespace rotequiv::harness

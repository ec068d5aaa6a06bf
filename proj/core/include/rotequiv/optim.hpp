// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rotequiv/autodiff.hpp"

namespace rotequiv::ad {

template <typename T>
struct NamedParam {
  std::string name;
  Var<T> var;
};

struct AdamWConfig {
  double lr = 2.5e-4;
  double weight_decay = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with decoupled weight decay: the decay term shrinks the parameter
/// directly and never enters the moment estimates.
template <typename T>
class AdamW {
 public:
  AdamW(std::vector<NamedParam<T>> params, AdamWConfig config = {});

  /// One update using the current gradients and learning rate `lr`.
  void step(double lr);
  void step() { step(config_.lr); }
  void zero_grad();

  const AdamWConfig& config() const { return config_; }
  std::int64_t step_count() const { return steps_; }
  void set_step_count(std::int64_t steps) { steps_ = steps; }

  const std::vector<NamedParam<T>>& params() const { return params_; }
  std::vector<Tensor<T>>& first_moments() { return m_; }
  std::vector<Tensor<T>>& second_moments() { return v_; }
  const std::vector<Tensor<T>>& first_moments() const { return m_; }
  const std::vector<Tensor<T>>& second_moments() const { return v_; }

 private:
  std::vector<NamedParam<T>> params_;
  AdamWConfig config_;
  std::vector<Tensor<T>> m_, v_;
  std::int64_t steps_ = 0;
};

/// Constant `base` for the first half of training, then cosine decay to
/// base / 20 at the final step.
double cosine_half_lr(double base, std::int64_t step, std::int64_t total_steps);

}  // namespace rotequiv::ad
